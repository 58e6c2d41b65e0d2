#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dgfa/io.hpp"
#include "dgfa/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dgfa;

namespace {

std::vector<std::string> class_names_for(int class_count) {
    std::vector<std::string> names;
    if (class_count == kSceneClassCount) {
        for (int c = 0; c < kSceneClassCount; ++c) names.push_back(kSceneClassNames[c]);
    } else {
        for (int c = 0; c < class_count; ++c) names.push_back("class" + std::to_string(c));
    }
    return names;
}

std::vector<std::string> list_dgg_files(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".dgg1")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("no .dgg1 files in " + dir);
    return files;
}

SceneData scene_from_bundle(GraphBundle&& b, const TrainConfig& cfg, bool need_labels) {
    if (need_labels && !b.labels)
        throw std::invalid_argument("graph file carries no labels; rebuild from a labeled cloud");
    if (b.labels && b.class_count != cfg.model.class_count)
        throw std::invalid_argument("graph file class count " + std::to_string(b.class_count) +
                                    " does not match model class_count " +
                                    std::to_string(cfg.model.class_count));
    if (cfg.model.dgfa_mode != DgfaMode::Off && b.graphs.rates != cfg.model.dgfa_rates)
        throw std::invalid_argument("graph file dilation rates do not match the model config");
    SceneData d;
    d.cloud.points = b.hierarchy.level_points[0];
    if (b.labels) d.cloud.labels = b.labels->levels[0];
    d.features = make_features(d.cloud.points, {}, cfg.model.input_channels);
    if (b.labels) d.labels = std::move(*b.labels);
    d.hierarchy = std::move(b.hierarchy);
    d.graphs = std::move(b.graphs);
    return d;
}

std::vector<SceneData> load_scenes(const std::string& dir, const TrainConfig& cfg,
                                   bool need_labels) {
    std::vector<SceneData> scenes;
    for (const auto& f : list_dgg_files(dir))
        scenes.push_back(scene_from_bundle(read_dgg1(f), cfg, need_labels));
    return scenes;
}

// --- subcommand bodies ---

void run_gen_data(const std::string& spec_path, int count, uint64_t seed,
                  const std::string& out_dir) {
    SceneSpec spec;
    if (!spec_path.empty()) spec = load_scene_spec(spec_path);
    spec.validate();
    if (count < 0) throw std::invalid_argument("gen-data: negative count");
    fs::create_directories(out_dir);

    auto scenes = gen_scenes(spec, count, seed);
    json files = json::array();
    for (int s = 0; s < count; ++s) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04d.xyz", s);
        CloudData cloud;
        cloud.points = scenes[s].points;
        cloud.labels = scenes[s].labels;
        write_cloud_xyz((fs::path(out_dir) / name).string(), cloud);
        files.push_back(name);
    }
    json manifest{{"count", count},
                  {"seed", seed},
                  {"files", files},
                  {"class_names", class_names_for(kSceneClassCount)}};
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
    std::printf("wrote %d scene(s) to %s\n", count, out_dir.c_str());
}

void run_build_graphs(const std::string& in_path, const std::string& out_path,
                      std::vector<int> ratios, int k, std::vector<int> rates, int step,
                      int dilation_k, int start) {
    CloudData cloud = read_cloud(in_path);
    GraphBundle b;
    b.hierarchy = build_hierarchy(cloud.points, ratios, k, start);
    DilationSpec base{dilation_k, step, 1};
    b.graphs = build_dilated_graphs(b.hierarchy.level_points.back(), base, rates);
    if (!cloud.labels.empty()) {
        int max_label = 0;
        for (int l : cloud.labels) max_label = std::max(max_label, l);
        b.class_count = max_label + 1;
        b.labels = label_pyramid(cloud.labels, b.class_count, b.hierarchy);
    }
    write_dgg1(out_path, b);

    std::printf("levels:");
    for (int l = 0; l < b.hierarchy.level_count(); ++l)
        std::printf(" %d", b.hierarchy.level_size(l));
    std::printf("\nexpansion K_s per rate:");
    for (int r : rates) {
        DilationSpec spec{dilation_k, step, r};
        std::printf(" %d:%d", r, expansion_count(spec));
    }
    std::printf("\nwrote %s\n", out_path.c_str());
}

void run_train(const std::string& config_path, const std::string& graphs_dir,
               const std::string& out_ckpt, std::string history_path) {
    TrainConfig cfg = load_train_config(config_path);
    auto scenes = load_scenes(graphs_dir, cfg, true);
    DgfaNet net(cfg.model, cfg.seed);
    TrainResult res = train(net, cfg, scenes);
    save_checkpoint(out_ckpt, net.params());
    if (history_path.empty()) history_path = out_ckpt + ".history.csv";
    write_history_csv(history_path, res.loss_history);
    std::printf("trained %lld step(s) over %zu scene(s)\n", res.steps, scenes.size());
    if (!res.loss_history.empty())
        std::printf("final epoch loss: %.6f\n", res.loss_history.back());
    std::printf("checkpoint: %s\nhistory: %s\n", out_ckpt.c_str(), history_path.c_str());
}

void run_eval(const std::string& config_path, const std::string& ckpt_path,
              const std::string& graphs_dir, const std::string& report_path,
              std::string per_class_path) {
    TrainConfig cfg = load_train_config(config_path);
    auto scenes = load_scenes(graphs_dir, cfg, true);
    DgfaNet net(cfg.model, 0);
    load_checkpoint(ckpt_path, net.params());
    Metrics m = evaluate_scenes(net, scenes);
    const auto names = class_names_for(cfg.model.class_count);
    write_metrics_json(report_path, m, names);
    if (per_class_path.empty()) per_class_path = report_path + ".per_class.csv";
    write_class_iou_csv(per_class_path, m, names);
    std::printf("OA %.4f  mIoU %.4f  mAcc %.4f\n", m.overall_accuracy, m.mean_iou,
                m.mean_class_accuracy);
    std::printf("report: %s\nper-class: %s\n", report_path.c_str(), per_class_path.c_str());
}

std::vector<int> brute_sparse(const PointSet& ps, int center, const DilationSpec& spec) {
    std::vector<std::pair<double, int>> all;
    all.reserve(ps.n() - 1);
    for (int i = 0; i < ps.n(); ++i) {
        if (i == center) continue;
        all.emplace_back(squared_distance(ps.point(center), ps.point(i)), i);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> out;
    for (int rank : selected_ranks(spec)) out.push_back(all[rank - 1].second);
    return out;
}

void run_bench_knn(int n, int k, int step, int rate, const std::string& backend, int repeat,
                   uint64_t seed, int query_count) {
    DilationSpec spec{k, step, rate};
    spec.validate();
    if (!spec_feasible(spec))
        throw std::invalid_argument("bench-knn: (k, step, rate) selects fewer than k neighbors");
    if (expansion_count(spec) > n - 1)
        throw std::invalid_argument("bench-knn: cloud too small for the expansion count");
    if (repeat < 1 || query_count < 1)
        throw std::invalid_argument("bench-knn: repeat and queries must be >= 1");

    std::mt19937_64 rng(seed);
    const double extent = std::cbrt(static_cast<double>(n)) * 0.05;
    std::uniform_real_distribution<double> uni(0.0, extent);
    std::vector<double> coords(static_cast<size_t>(n) * 3);
    for (double& c : coords) c = uni(rng);
    PointSet ps(std::move(coords));

    const int subsample = std::min(512, n);
    std::vector<int> check_queries(subsample);
    for (int i = 0; i < subsample; ++i) check_queries[i] = static_cast<int>(rng() % n);

    const auto t0 = std::chrono::steady_clock::now();
    SpatialIndex index(ps);
    const auto t1 = std::chrono::steady_clock::now();
    std::printf("n=%d k=%d step=%d rate=%d Ks=%d backend=%s\n", n, k, step, rate,
                expansion_count(spec), backend.c_str());
    std::printf("index build: %.1f ms\n",
                std::chrono::duration<double, std::milli>(t1 - t0).count());

    // correctness gate on the subsample, always both backends
    for (int q : check_queries) {
        if (sparse_knn(index, q, spec).neighbors != brute_sparse(ps, q, spec))
            throw std::runtime_error("bench-knn: backend disagreement at query " +
                                     std::to_string(q));
    }
    std::printf("correctness: kdtree and brute agree on %d subsampled queries\n", subsample);

    std::vector<int> timed_queries(query_count);
    for (int i = 0; i < query_count; ++i) timed_queries[i] = static_cast<int>(rng() % n);
    std::vector<double> per_query_us;
    per_query_us.reserve(static_cast<size_t>(repeat) * query_count);
    for (int r = 0; r < repeat; ++r) {
        for (int q : timed_queries) {
            const auto a = std::chrono::steady_clock::now();
            if (backend == "kdtree") {
                volatile int sink = sparse_knn(index, q, spec).neighbors[0];
                (void)sink;
            } else {
                volatile int sink = brute_sparse(ps, q, spec)[0];
                (void)sink;
            }
            const auto b = std::chrono::steady_clock::now();
            per_query_us.push_back(std::chrono::duration<double, std::micro>(b - a).count());
        }
    }
    std::sort(per_query_us.begin(), per_query_us.end());
    const size_t m = per_query_us.size();
    const double median = m % 2 ? per_query_us[m / 2]
                                : 0.5 * (per_query_us[m / 2 - 1] + per_query_us[m / 2]);
    const double p95 = per_query_us[std::min(m - 1, static_cast<size_t>(0.95 * m))];
    std::printf("per-query time over %zu samples: median %.2f us, p95 %.2f us\n", m, median, p95);
}

void run_export_features(const std::string& config_path, const std::string& ckpt_path,
                         const std::string& graphs_path, const std::string& layer,
                         const std::string& out_path) {
    if (layer != "last-upsample")
        throw std::invalid_argument("export-features: unknown layer '" + layer + "'");
    TrainConfig cfg = load_train_config(config_path);
    SceneData scene = scene_from_bundle(read_dgg1(graphs_path), cfg, false);
    DgfaNet net(cfg.model, 0);
    load_checkpoint(ckpt_path, net.params());

    Tape t;
    auto ids = net.params().stage(t);
    Tape::Var feats = net.last_upsample(t, ids, scene.features, scene.hierarchy, scene.graphs);
    const Tensor& F = t.val(feats);

    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f.precision(17);
    f << "x,y,z,label";
    for (int c = 0; c < F.cols(); ++c) f << ",c" << c;
    f << ",channel_mean\n";
    const bool has_labels = !scene.cloud.labels.empty();
    for (int i = 0; i < F.rows(); ++i) {
        const double* p = scene.cloud.points.point(i);
        f << p[0] << "," << p[1] << "," << p[2] << ","
          << (has_labels ? scene.cloud.labels[i] : -1);
        double sum = 0.0;
        for (int c = 0; c < F.cols(); ++c) {
            f << "," << F(i, c);
            sum += F(i, c);
        }
        f << "," << sum / F.cols() << "\n";
    }
    std::printf("wrote %d feature rows (%d channels) to %s\n", F.rows(), F.cols(),
                out_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dgfa: dilated graph networks for point cloud segmentation"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate synthetic labeled room scenes");
    std::string gen_spec, gen_out;
    int gen_count = 0;
    uint64_t gen_seed = 1;
    gen->add_option("--spec", gen_spec, "scene spec JSON (defaults used when omitted)");
    gen->add_option("--count", gen_count, "number of scenes")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output directory")->required();

    // build-graphs
    auto* bld = app.add_subcommand("build-graphs", "precompute the hierarchy and dilated graphs");
    std::string bld_in, bld_out;
    std::vector<int> bld_ratios{4, 4, 2}, bld_rates{1, 2, 4, 8};
    int bld_k = 16, bld_step = 4, bld_dk = 8, bld_start = 0;
    bld->add_option("--in", bld_in, "input cloud file")->required();
    bld->add_option("--out", bld_out, "output .dgg1 file")->required();
    bld->add_option("--ratios", bld_ratios, "downsampling ratios")->delimiter(',');
    bld->add_option("--k", bld_k, "hierarchy neighbor count");
    bld->add_option("--rates", bld_rates, "dilation rates")->delimiter(',');
    bld->add_option("--step", bld_step, "sparse search sampling step");
    bld->add_option("--dilation-k", bld_dk, "neighbors kept per dilated graph");
    bld->add_option("--start", bld_start, "FPS start index");

    // train
    auto* trn = app.add_subcommand("train", "train a model on prebuilt graph files");
    std::string trn_config, trn_graphs, trn_out, trn_history;
    trn->add_option("--config", trn_config, "train config JSON")->required();
    trn->add_option("--graphs", trn_graphs, "directory of .dgg1 files")->required();
    trn->add_option("--out", trn_out, "output checkpoint")->required();
    trn->add_option("--history", trn_history, "loss history CSV (default <ckpt>.history.csv)");

    // eval
    auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on prebuilt graph files");
    std::string evl_config, evl_ckpt, evl_graphs, evl_report, evl_per_class;
    evl->add_option("--config", evl_config, "train config JSON")->required();
    evl->add_option("--ckpt", evl_ckpt, "model checkpoint")->required();
    evl->add_option("--graphs", evl_graphs, "directory of .dgg1 files")->required();
    evl->add_option("--report", evl_report, "metrics JSON output")->required();
    evl->add_option("--per-class", evl_per_class,
                    "per-class IoU CSV (default <report>.per_class.csv)");

    // bench-knn
    auto* bch = app.add_subcommand("bench-knn", "benchmark the sparse neighbor search");
    int bch_n = 100000, bch_k = 16, bch_step = 4, bch_rate = 4, bch_repeat = 3,
        bch_queries = 512;
    uint64_t bch_seed = 1;
    std::string bch_backend = "kdtree";
    bch->add_option("--n", bch_n, "cloud size");
    bch->add_option("--k", bch_k, "target neighbor count");
    bch->add_option("--step", bch_step, "sampling step");
    bch->add_option("--rate", bch_rate, "dilation rate");
    bch->add_option("--backend", bch_backend, "timed backend")
        ->check(CLI::IsMember({"kdtree", "brute"}));
    bch->add_option("--repeat", bch_repeat, "timing repetitions");
    bch->add_option("--queries", bch_queries, "timed queries per repetition");
    bch->add_option("--seed", bch_seed, "RNG seed");

    // export-features
    auto* exp = app.add_subcommand("export-features", "dump per-point decoder features as CSV");
    std::string exp_config, exp_ckpt, exp_graphs, exp_out, exp_layer = "last-upsample";
    exp->add_option("--config", exp_config, "train config JSON")->required();
    exp->add_option("--ckpt", exp_ckpt, "model checkpoint")->required();
    exp->add_option("--graphs", exp_graphs, "a single .dgg1 file")->required();
    exp->add_option("--layer", exp_layer, "layer to export (last-upsample)");
    exp->add_option("--out", exp_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
        if (gen->parsed()) run_gen_data(gen_spec, gen_count, gen_seed, gen_out);
        if (bld->parsed())
            run_build_graphs(bld_in, bld_out, bld_ratios, bld_k, bld_rates, bld_step, bld_dk,
                             bld_start);
        if (trn->parsed()) run_train(trn_config, trn_graphs, trn_out, trn_history);
        if (evl->parsed()) run_eval(evl_config, evl_ckpt, evl_graphs, evl_report, evl_per_class);
        if (bch->parsed())
            run_bench_knn(bch_n, bch_k, bch_step, bch_rate, bch_backend, bch_repeat, bch_seed,
                          bch_queries);
        if (exp->parsed())
            run_export_features(exp_config, exp_ckpt, exp_graphs, exp_layer, exp_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        const bool numeric = msg.find("non-finite") != std::string::npos ||
                             msg.find("disagreement") != std::string::npos;
        return numeric ? 3 : 2;
    }
    return 0;
}
