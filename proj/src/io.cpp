#include "dgfa/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace dgfa {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) fail("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) fail("cannot write " + path);
    return f;
}

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is, const char* section) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) fail(std::string("DGG1: truncated read in section ") + section);
    return v;
}

void put_tag(std::ostream& os, const char* tag) { os.write(tag, 4); }

void expect_tag(std::istream& is, const char* tag) {
    char buf[5] = {0};
    is.read(buf, 4);
    if (!is || std::strncmp(buf, tag, 4) != 0)
        fail(std::string("DGG1: bad or missing section tag, expected ") + tag);
}

void write_graph_list(std::ostream& os, const std::vector<NeighborList>& lists) {
    for (const auto& nl : lists) {
        put<uint32_t>(os, static_cast<uint32_t>(nl.neighbors.size()));
        for (int v : nl.neighbors) put<uint32_t>(os, static_cast<uint32_t>(v));
        for (double d : nl.distances) put<double>(os, d);
    }
}

std::vector<NeighborList> read_graph_list(std::istream& is, int count, int index_limit,
                                          const char* section) {
    std::vector<NeighborList> lists;
    lists.reserve(count);
    for (int i = 0; i < count; ++i) {
        NeighborList nl;
        nl.center = i;
        const uint32_t k = get<uint32_t>(is, section);
        if (k > static_cast<uint32_t>(index_limit))
            fail(std::string("DGG1: neighbor count out of range in section ") + section);
        nl.neighbors.resize(k);
        nl.distances.resize(k);
        nl.ranks.resize(k);
        for (uint32_t j = 0; j < k; ++j) {
            const uint32_t idx = get<uint32_t>(is, section);
            if (idx >= static_cast<uint32_t>(index_limit))
                fail(std::string("DGG1: neighbor index out of range in section ") + section);
            nl.neighbors[j] = static_cast<int>(idx);
        }
        for (uint32_t j = 0; j < k; ++j) nl.distances[j] = get<double>(is, section);
        for (uint32_t j = 0; j < k; ++j) nl.ranks[j] = static_cast<int>(j) + 1;
        lists.push_back(std::move(nl));
    }
    return lists;
}

}  // namespace

CloudData read_cloud(const std::string& path) {
    std::ifstream f = open_in(path);
    std::string first;
    std::getline(f, first);
    CloudData cloud;
    int columns = -1;
    auto consume_row = [&](const std::string& line) {
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty()) return;
        if (columns < 0) columns = static_cast<int>(vals.size());
        if (static_cast<int>(vals.size()) != columns)
            fail(path + ": inconsistent column count");
        if (columns != 3 && columns != 4 && columns != 6 && columns != 7)
            fail(path + ": unsupported column count " + std::to_string(columns));
        cloud.points.coords.insert(cloud.points.coords.end(), vals.begin(), vals.begin() + 3);
        if (columns == 6 || columns == 7)
            cloud.rgb.insert(cloud.rgb.end(), vals.begin() + 3, vals.begin() + 6);
        if (columns == 4) cloud.labels.push_back(static_cast<int>(vals[3]));
        if (columns == 7) cloud.labels.push_back(static_cast<int>(vals[6]));
    };

    if (first == "ply" || first == "ply\r") {
        // minimal ASCII PLY: x/y/z float properties, optional uchar rgb, int label
        std::string line;
        int vertex_count = 0;
        std::vector<std::string> props;
        bool ascii = false;
        while (std::getline(f, line)) {
            std::istringstream ss(line);
            std::string word;
            ss >> word;
            if (word == "format") {
                std::string fmt;
                ss >> fmt;
                ascii = fmt == "ascii";
            } else if (word == "element") {
                std::string what;
                ss >> what >> vertex_count;
                if (what != "vertex") fail(path + ": only vertex elements supported");
            } else if (word == "property") {
                std::string type, name;
                ss >> type >> name;
                props.push_back(name);
            } else if (word == "end_header") {
                break;
            }
        }
        if (!ascii) fail(path + ": binary PLY not supported");
        int xi = -1, ri = -1, li = -1;
        for (size_t i = 0; i < props.size(); ++i) {
            if (props[i] == "x") xi = static_cast<int>(i);
            if (props[i] == "red" || props[i] == "r") ri = static_cast<int>(i);
            if (props[i] == "label") li = static_cast<int>(i);
        }
        if (xi < 0) fail(path + ": PLY missing x/y/z properties");
        for (int v = 0; v < vertex_count; ++v) {
            if (!std::getline(f, line)) fail(path + ": truncated PLY body");
            std::istringstream ss(line);
            std::vector<double> vals;
            double x;
            while (ss >> x) vals.push_back(x);
            if (static_cast<int>(vals.size()) < static_cast<int>(props.size()))
                fail(path + ": short PLY row");
            for (int a = 0; a < 3; ++a) cloud.points.coords.push_back(vals[xi + a]);
            if (ri >= 0)
                for (int a = 0; a < 3; ++a) cloud.rgb.push_back(vals[ri + a]);
            if (li >= 0) cloud.labels.push_back(static_cast<int>(vals[li]));
        }
    } else {
        auto handle = [&](std::string line) {
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            consume_row(line);
        };
        handle(first);
        std::string line;
        while (std::getline(f, line)) handle(line);
    }
    cloud.points.validate();
    return cloud;
}

void write_cloud_xyz(const std::string& path, const CloudData& cloud) {
    std::ofstream f = open_out(path);
    f.precision(17);
    const bool rgb = !cloud.rgb.empty();
    const bool lab = !cloud.labels.empty();
    f << "# x y z" << (rgb ? " r g b" : "") << (lab ? " label" : "") << "\n";
    for (int i = 0; i < cloud.points.n(); ++i) {
        const double* p = cloud.points.point(i);
        f << p[0] << " " << p[1] << " " << p[2];
        if (rgb)
            f << " " << cloud.rgb[3 * i] << " " << cloud.rgb[3 * i + 1] << " "
              << cloud.rgb[3 * i + 2];
        if (lab) f << " " << cloud.labels[i];
        f << "\n";
    }
}

void write_dgg1(const std::string& path, const GraphBundle& bundle) {
    const Hierarchy& h = bundle.hierarchy;
    std::ofstream os = open_out(path, true);
    os.write("DGG1", 4);
    put<uint16_t>(os, 1);  // version
    put<uint32_t>(os, static_cast<uint32_t>(h.level_size(0)));
    put<uint16_t>(os, static_cast<uint16_t>(h.level_count()));
    for (int l = 0; l < h.level_count(); ++l)
        put<uint32_t>(os, static_cast<uint32_t>(h.level_size(l)));
    put<uint16_t>(os, static_cast<uint16_t>(h.k));
    put<uint16_t>(os, static_cast<uint16_t>(h.ratios.size()));
    for (int r : h.ratios) put<uint16_t>(os, static_cast<uint16_t>(r));
    put<uint32_t>(os, static_cast<uint32_t>(h.start));
    put<uint16_t>(os, static_cast<uint16_t>(bundle.graphs.base.k_target));
    put<uint16_t>(os, static_cast<uint16_t>(bundle.graphs.base.step));
    put<uint16_t>(os, static_cast<uint16_t>(bundle.graphs.rates.size()));
    for (int r : bundle.graphs.rates) put<uint16_t>(os, static_cast<uint16_t>(r));
    put<uint16_t>(os, static_cast<uint16_t>(bundle.class_count));
    put<uint8_t>(os, bundle.labels ? 1 : 0);

    put_tag(os, "COOR");
    os.write(reinterpret_cast<const char*>(h.level_points[0].coords.data()),
             static_cast<std::streamsize>(h.level_points[0].coords.size() * sizeof(double)));

    put_tag(os, "FPSI");
    for (size_t l = 0; l < h.fps_indices.size(); ++l)
        for (int idx : h.fps_indices[l]) put<uint32_t>(os, static_cast<uint32_t>(idx));

    put_tag(os, "GSUB");
    for (const auto& g : h.sub_graphs) write_graph_list(os, g);

    put_tag(os, "GMAP");
    for (const auto& g : h.mapping_graphs) write_graph_list(os, g);

    put_tag(os, "DGRT");
    for (const auto& g : bundle.graphs.graphs) write_graph_list(os, g);

    if (bundle.labels) {
        put_tag(os, "LABL");
        for (const auto& level : bundle.labels->levels)
            for (int v : level) put<uint16_t>(os, static_cast<uint16_t>(v));
    }
    if (!os) fail("DGG1: write failed for " + path);
}

GraphBundle read_dgg1(const std::string& path) {
    std::ifstream is = open_in(path, true);
    char magic[5] = {0};
    is.read(magic, 4);
    if (!is || std::strncmp(magic, "DGG1", 4) != 0) fail("DGG1: bad magic in " + path);
    const uint16_t version = get<uint16_t>(is, "header");
    if (version != 1) fail("DGG1: unsupported version");

    GraphBundle b;
    Hierarchy& h = b.hierarchy;
    const uint32_t n = get<uint32_t>(is, "header");
    const uint16_t levels = get<uint16_t>(is, "header");
    if (levels < 2 || levels > 16) fail("DGG1: implausible level count in header");
    std::vector<uint32_t> sizes(levels);
    for (auto& s : sizes) s = get<uint32_t>(is, "header");
    if (sizes[0] != n) fail("DGG1: level-0 size does not match n in header");
    h.k = get<uint16_t>(is, "header");
    const uint16_t ratio_count = get<uint16_t>(is, "header");
    if (ratio_count != levels - 1) fail("DGG1: ratio count does not match level count");
    h.ratios.resize(ratio_count);
    for (auto& r : h.ratios) r = get<uint16_t>(is, "header");
    h.start = static_cast<int>(get<uint32_t>(is, "header"));
    b.graphs.base.k_target = get<uint16_t>(is, "header");
    b.graphs.base.step = get<uint16_t>(is, "header");
    b.graphs.base.rate = 1;
    const uint16_t rate_count = get<uint16_t>(is, "header");
    b.graphs.rates.resize(rate_count);
    for (auto& r : b.graphs.rates) r = get<uint16_t>(is, "header");
    b.class_count = get<uint16_t>(is, "header");
    const bool has_labels = get<uint8_t>(is, "header") != 0;

    expect_tag(is, "COOR");
    h.level_points.resize(levels);
    h.level_points[0].coords.resize(static_cast<size_t>(n) * 3);
    is.read(reinterpret_cast<char*>(h.level_points[0].coords.data()),
            static_cast<std::streamsize>(h.level_points[0].coords.size() * sizeof(double)));
    if (!is) fail("DGG1: truncated COOR section");

    expect_tag(is, "FPSI");
    h.fps_indices.resize(levels - 1);
    h.level_indices.resize(levels);
    h.level_indices[0].resize(n);
    for (uint32_t i = 0; i < n; ++i) h.level_indices[0][i] = static_cast<int>(i);
    for (int l = 1; l < levels; ++l) {
        h.fps_indices[l - 1].resize(sizes[l]);
        for (auto& idx : h.fps_indices[l - 1]) {
            const uint32_t v = get<uint32_t>(is, "FPSI");
            if (v >= sizes[l - 1]) fail("DGG1: FPS index out of range in section FPSI");
            idx = static_cast<int>(v);
        }
        h.level_indices[l].reserve(sizes[l]);
        h.level_points[l].coords.reserve(static_cast<size_t>(sizes[l]) * 3);
        for (int idx : h.fps_indices[l - 1]) {
            h.level_indices[l].push_back(h.level_indices[l - 1][idx]);
            const double* p = h.level_points[l - 1].point(idx);
            h.level_points[l].coords.insert(h.level_points[l].coords.end(), p, p + 3);
        }
    }

    expect_tag(is, "GSUB");
    h.sub_graphs.resize(levels);
    for (int l = 0; l < levels; ++l)
        h.sub_graphs[l] = read_graph_list(is, static_cast<int>(sizes[l]),
                                          static_cast<int>(sizes[l]), "GSUB");

    expect_tag(is, "GMAP");
    h.mapping_graphs.resize(levels - 1);
    for (int l = 1; l < levels; ++l)
        h.mapping_graphs[l - 1] = read_graph_list(is, static_cast<int>(sizes[l]),
                                                  static_cast<int>(sizes[l - 1]), "GMAP");

    expect_tag(is, "DGRT");
    b.graphs.graphs.resize(rate_count);
    for (int r = 0; r < rate_count; ++r) {
        b.graphs.graphs[r] = read_graph_list(is, static_cast<int>(sizes[levels - 1]),
                                             static_cast<int>(sizes[levels - 1]), "DGRT");
        DilationSpec spec = b.graphs.base;
        spec.rate = b.graphs.rates[r];
        const std::vector<int> ranks = selected_ranks(spec);
        for (auto& nl : b.graphs.graphs[r]) {
            if (nl.size() != static_cast<int>(ranks.size()))
                fail("DGG1: dilated list length mismatch in section DGRT");
            nl.ranks = ranks;
        }
    }

    if (has_labels) {
        expect_tag(is, "LABL");
        LabelPyramid p;
        p.levels.resize(levels);
        for (int l = 0; l < levels; ++l) {
            p.levels[l].resize(sizes[l]);
            for (auto& v : p.levels[l]) {
                v = get<uint16_t>(is, "LABL");
                if (v >= b.class_count) fail("DGG1: label out of range in section LABL");
            }
        }
        b.labels = std::move(p);
    }
    return b;
}

void save_checkpoint(const std::string& path, const ParamStore& store) {
    std::ofstream os = open_out(path, true);
    os.write("DGCK", 4);
    put<uint16_t>(os, 1);
    put<uint32_t>(os, static_cast<uint32_t>(store.entries.size()));
    for (const auto& e : store.entries) {
        put<uint16_t>(os, static_cast<uint16_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        put<uint8_t>(os, static_cast<uint8_t>(e.value.shape.size()));
        for (int d : e.value.shape) put<uint32_t>(os, static_cast<uint32_t>(d));
        os.write(reinterpret_cast<const char*>(e.value.data.data()),
                 static_cast<std::streamsize>(e.value.data.size() * sizeof(double)));
    }
    if (!os) fail("checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, ParamStore& store) {
    std::ifstream is = open_in(path, true);
    char magic[5] = {0};
    is.read(magic, 4);
    if (!is || std::strncmp(magic, "DGCK", 4) != 0) fail("checkpoint: bad magic in " + path);
    if (get<uint16_t>(is, "checkpoint") != 1) fail("checkpoint: unsupported version");
    const uint32_t count = get<uint32_t>(is, "checkpoint");
    if (count != store.entries.size())
        fail("checkpoint: parameter count does not match the model config");
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t len = get<uint16_t>(is, "checkpoint");
        std::string name(len, '\0');
        is.read(name.data(), len);
        if (!is) fail("checkpoint: truncated name table");
        auto it = store.by_name.find(name);
        if (it == store.by_name.end()) fail("checkpoint: unknown parameter " + name);
        auto& e = store.entries[it->second];
        const uint8_t ndim = get<uint8_t>(is, "checkpoint");
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(get<uint32_t>(is, "checkpoint"));
        if (shape != e.value.shape)
            fail("checkpoint: shape mismatch for " + name + " (config/checkpoint mismatch)");
        is.read(reinterpret_cast<char*>(e.value.data.data()),
                static_cast<std::streamsize>(e.value.data.size() * sizeof(double)));
        if (!is) fail("checkpoint: truncated data for " + name);
    }
}

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) fail("config: unknown key '" + it.key() + "' in " + where);
    }
}

ModelConfig model_from_json(const json& j) {
    reject_unknown(j,
                   {"input_channels", "stem_width", "encoder_widths", "dgfa_rates",
                    "dgfa_block_width", "dgfa_out_width", "dgfa_k", "dgfa_step", "dgfa_mode",
                    "decoder_widths", "class_count"},
                   "model");
    ModelConfig m;
    m.input_channels = j.value("input_channels", m.input_channels);
    m.stem_width = j.value("stem_width", m.stem_width);
    m.encoder_widths = j.value("encoder_widths", m.encoder_widths);
    m.dgfa_rates = j.value("dgfa_rates", m.dgfa_rates);
    m.dgfa_block_width = j.value("dgfa_block_width", m.dgfa_block_width);
    m.dgfa_out_width = j.value("dgfa_out_width", m.dgfa_out_width);
    m.dgfa_k = j.value("dgfa_k", m.dgfa_k);
    m.dgfa_step = j.value("dgfa_step", m.dgfa_step);
    m.dgfa_mode = dgfa_mode_from_string(j.value("dgfa_mode", std::string("dense")));
    m.decoder_widths = j.value("decoder_widths", m.decoder_widths);
    m.class_count = j.value("class_count", m.class_count);
    return m;
}

json model_to_json(const ModelConfig& m) {
    return json{{"input_channels", m.input_channels},
                {"stem_width", m.stem_width},
                {"encoder_widths", m.encoder_widths},
                {"dgfa_rates", m.dgfa_rates},
                {"dgfa_block_width", m.dgfa_block_width},
                {"dgfa_out_width", m.dgfa_out_width},
                {"dgfa_k", m.dgfa_k},
                {"dgfa_step", m.dgfa_step},
                {"dgfa_mode", to_string(m.dgfa_mode)},
                {"decoder_widths", m.decoder_widths},
                {"class_count", m.class_count}};
}

}  // namespace

TrainConfig load_train_config(const std::string& path) {
    std::ifstream f = open_in(path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        fail("config: JSON parse error in " + path + ": " + e.what());
    }
    reject_unknown(j,
                   {"epochs", "lr", "beta1", "beta2", "adam_eps", "batch_size", "seed", "lambdas",
                    "reduction", "ratios", "graph_k", "model"},
                   "train config");
    TrainConfig c;
    try {
        c.epochs = j.value("epochs", c.epochs);
        c.lr = j.value("lr", c.lr);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.adam_eps = j.value("adam_eps", c.adam_eps);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        c.lambdas = j.value("lambdas", c.lambdas);
        const std::string red = j.value("reduction", std::string("mean"));
        if (red != "mean" && red != "sum") fail("config: reduction must be 'mean' or 'sum'");
        c.mean_reduction = red == "mean";
        c.ratios = j.value("ratios", c.ratios);
        c.graph_k = j.value("graph_k", c.graph_k);
        if (j.contains("model")) c.model = model_from_json(j.at("model"));
    } catch (const json::exception& e) {
        fail("config: schema violation in " + path + ": " + e.what());
    }
    c.validate();
    return c;
}

void save_train_config(const std::string& path, const TrainConfig& c) {
    json j{{"epochs", c.epochs},
           {"lr", c.lr},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"adam_eps", c.adam_eps},
           {"batch_size", c.batch_size},
           {"seed", c.seed},
           {"lambdas", c.lambdas},
           {"reduction", c.mean_reduction ? "mean" : "sum"},
           {"ratios", c.ratios},
           {"graph_k", c.graph_k},
           {"model", model_to_json(c.model)}};
    open_out(path) << j.dump(2) << "\n";
}

SceneSpec load_scene_spec(const std::string& path) {
    std::ifstream f = open_in(path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        fail("scene spec: JSON parse error in " + path + ": " + e.what());
    }
    reject_unknown(j,
                   {"min_width", "max_width", "min_depth", "max_depth", "min_height", "max_height",
                    "points_per_scene", "board_offset", "board_min_w", "board_max_w", "board_min_h",
                    "board_max_h", "min_boards", "max_boards", "clutter_objects", "noise_sigma",
                    "class_fractions"},
                   "scene spec");
    SceneSpec s;
    try {
        s.min_width = j.value("min_width", s.min_width);
        s.max_width = j.value("max_width", s.max_width);
        s.min_depth = j.value("min_depth", s.min_depth);
        s.max_depth = j.value("max_depth", s.max_depth);
        s.min_height = j.value("min_height", s.min_height);
        s.max_height = j.value("max_height", s.max_height);
        s.points_per_scene = j.value("points_per_scene", s.points_per_scene);
        s.board_offset = j.value("board_offset", s.board_offset);
        s.board_min_w = j.value("board_min_w", s.board_min_w);
        s.board_max_w = j.value("board_max_w", s.board_max_w);
        s.board_min_h = j.value("board_min_h", s.board_min_h);
        s.board_max_h = j.value("board_max_h", s.board_max_h);
        s.min_boards = j.value("min_boards", s.min_boards);
        s.max_boards = j.value("max_boards", s.max_boards);
        s.clutter_objects = j.value("clutter_objects", s.clutter_objects);
        s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
        if (j.contains("class_fractions")) {
            auto v = j.at("class_fractions").get<std::vector<double>>();
            if (v.size() != 5) fail("scene spec: class_fractions must have 5 entries");
            for (int i = 0; i < 5; ++i) s.class_fractions[i] = v[i];
        }
    } catch (const json::exception& e) {
        fail("scene spec: schema violation in " + path + ": " + e.what());
    }
    s.validate();
    return s;
}

void write_history_csv(const std::string& path, const std::vector<double>& loss_history) {
    std::ofstream f = open_out(path);
    f.precision(17);
    f << "epoch,loss\n";
    for (size_t i = 0; i < loss_history.size(); ++i) f << i << "," << loss_history[i] << "\n";
}

void write_metrics_json(const std::string& path, const Metrics& m,
                        const std::vector<std::string>& class_names) {
    json per_class = json::object();
    for (int c = 0; c < m.class_count; ++c) {
        const std::string name =
            c < static_cast<int>(class_names.size()) ? class_names[c] : "class" + std::to_string(c);
        per_class[name] = m.per_class_iou[c];
    }
    json confusion = json::array();
    for (int g = 0; g < m.class_count; ++g) {
        json row = json::array();
        for (int p = 0; p < m.class_count; ++p) row.push_back(m.at(g, p));
        confusion.push_back(row);
    }
    json j{{"overall_accuracy", m.overall_accuracy},
           {"mean_class_accuracy", m.mean_class_accuracy},
           {"mean_iou", m.mean_iou},
           {"per_class_iou", per_class},
           {"confusion", confusion}};
    open_out(path) << j.dump(2) << "\n";
}

void write_class_iou_csv(const std::string& path, const Metrics& m,
                         const std::vector<std::string>& class_names) {
    std::ofstream f = open_out(path);
    f.precision(17);
    f << "class,iou\n";
    for (int c = 0; c < m.class_count; ++c) {
        const std::string name =
            c < static_cast<int>(class_names.size()) ? class_names[c] : "class" + std::to_string(c);
        f << name << "," << m.per_class_iou[c] << "\n";
    }
}

void write_ablation_csv(const std::string& path, const AblationResult& res,
                        const std::vector<std::string>& class_names) {
    std::ofstream f = open_out(path);
    f.precision(17);
    f << "arm,seed,miou,oa,macc";
    for (const auto& n : class_names) f << ",iou_" << n;
    f << "\n";
    for (const auto& r : res.rows) {
        f << r.arm << "," << r.seed << "," << r.metrics.mean_iou << ","
          << r.metrics.overall_accuracy << "," << r.metrics.mean_class_accuracy;
        for (size_t c = 0; c < class_names.size(); ++c)
            f << "," << (c < r.metrics.per_class_iou.size() ? r.metrics.per_class_iou[c] : -1.0);
        f << "\n";
    }
}

void write_ablation_json(const std::string& path, const AblationResult& res,
                         const std::vector<std::string>& class_names) {
    json arms = json::array();
    for (const auto& s : res.summary) {
        json per_class = json::object();
        for (size_t c = 0; c < s.median_class_iou.size(); ++c) {
            const std::string name = c < class_names.size() ? class_names[c]
                                                            : "class" + std::to_string(c);
            per_class[name] = s.median_class_iou[c];
        }
        arms.push_back(json{{"arm", s.arm},
                            {"median_miou", s.median_miou},
                            {"min_miou", s.min_miou},
                            {"max_miou", s.max_miou},
                            {"median_oa", s.median_oa},
                            {"median_macc", s.median_macc},
                            {"median_class_iou", per_class}});
    }
    open_out(path) << json{{"arms", arms}}.dump(2) << "\n";
}

}  // namespace dgfa
