#include "dgfa/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dgfa {

const char* const kSceneClassNames[kSceneClassCount] = {"floor", "ceiling", "wall", "board",
                                                        "clutter"};

void SceneSpec::validate() const {
    if (min_width <= 0 || max_width < min_width || min_depth <= 0 || max_depth < min_depth ||
        min_height <= 0 || max_height < min_height)
        throw std::invalid_argument("SceneSpec: degenerate extents");
    if (points_per_scene < 32) throw std::invalid_argument("SceneSpec: too few points");
    if (board_offset <= 0) throw std::invalid_argument("SceneSpec: board offset must be > 0");
    if (board_min_w <= 0 || board_max_w < board_min_w || board_min_h <= 0 ||
        board_max_h < board_min_h)
        throw std::invalid_argument("SceneSpec: degenerate board size range");
    if (min_boards < 1 || max_boards < min_boards)
        throw std::invalid_argument("SceneSpec: board count range invalid");
    if (noise_sigma < 0) throw std::invalid_argument("SceneSpec: negative noise");
    double sum = 0;
    for (double f : class_fractions) {
        if (f < 0) throw std::invalid_argument("SceneSpec: negative class fraction");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("SceneSpec: class fractions must sum to 1");
}

namespace {

struct Rect {
    // origin + u*eu + v*ev, u in [0,ul], v in [0,vl]
    double origin[3];
    double eu[3], ev[3];
    double ul, vl;

    double area() const { return ul * vl; }
    void sample(std::mt19937_64& rng, double* out) const {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double u = uni(rng) * ul, v = uni(rng) * vl;
        for (int a = 0; a < 3; ++a) out[a] = origin[a] + u * eu[a] + v * ev[a];
    }
};

Rect axis_rect(double ox, double oy, double oz, int axis_u, double ul, int axis_v, double vl) {
    Rect r{};
    r.origin[0] = ox;
    r.origin[1] = oy;
    r.origin[2] = oz;
    r.eu[axis_u] = 1.0;
    r.ev[axis_v] = 1.0;
    r.ul = ul;
    r.vl = vl;
    return r;
}

void sample_class(std::vector<Rect>& rects, int count, int label, std::mt19937_64& rng,
                  std::vector<double>& coords, std::vector<int>& labels) {
    if (rects.empty() || count <= 0) return;
    std::vector<double> cumulative;
    double total = 0;
    for (const Rect& r : rects) {
        total += r.area();
        cumulative.push_back(total);
    }
    std::uniform_real_distribution<double> uni(0.0, total);
    double p[3];
    for (int i = 0; i < count; ++i) {
        const double x = uni(rng);
        const size_t pick =
            std::lower_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin();
        rects[std::min(pick, rects.size() - 1)].sample(rng, p);
        coords.insert(coords.end(), p, p + 3);
        labels.push_back(label);
    }
}

}  // namespace

std::vector<LabeledCloud> gen_scenes(const SceneSpec& spec, int count, uint64_t seed) {
    spec.validate();
    if (count < 0) throw std::invalid_argument("gen_scenes: negative count");
    std::vector<LabeledCloud> scenes;
    scenes.reserve(count);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (int s = 0; s < count; ++s) {
        const double W = spec.min_width + uni(rng) * (spec.max_width - spec.min_width);
        const double D = spec.min_depth + uni(rng) * (spec.max_depth - spec.min_depth);
        const double H = spec.min_height + uni(rng) * (spec.max_height - spec.min_height);
        const double hw = W / 2, hd = D / 2;

        std::vector<Rect> floor{axis_rect(-hw, -hd, 0, 0, W, 1, D)};
        std::vector<Rect> ceiling{axis_rect(-hw, -hd, H, 0, W, 1, D)};
        // walls: x=-hw, x=+hw, y=-hd, y=+hd
        std::vector<Rect> walls{
            axis_rect(-hw, -hd, 0, 1, D, 2, H),
            axis_rect(hw, -hd, 0, 1, D, 2, H),
            axis_rect(-hw, -hd, 0, 0, W, 2, H),
            axis_rect(-hw, hd, 0, 0, W, 2, H),
        };

        std::uniform_int_distribution<int> board_count_dist(spec.min_boards, spec.max_boards);
        const int boards = board_count_dist(rng);
        std::vector<Rect> board_rects;
        for (int b = 0; b < boards; ++b) {
            const int wall = static_cast<int>(uni(rng) * 4) % 4;
            const double bw =
                spec.board_min_w + uni(rng) * (spec.board_max_w - spec.board_min_w);
            const double bh =
                spec.board_min_h + uni(rng) * (spec.board_max_h - spec.board_min_h);
            const double along = (wall < 2) ? D : W;
            const double usable = std::max(0.1, along - bw - 0.4);
            const double u0 = -((wall < 2) ? hd : hw) + 0.2 + uni(rng) * usable;
            const double zmax = std::max(0.9, H - bh - 0.2);
            const double z0 = 0.8 + uni(rng) * std::max(0.0, zmax - 0.8);
            const double off = spec.board_offset;
            switch (wall) {
                case 0: board_rects.push_back(axis_rect(-hw + off, u0, z0, 1, bw, 2, bh)); break;
                case 1: board_rects.push_back(axis_rect(hw - off, u0, z0, 1, bw, 2, bh)); break;
                case 2: board_rects.push_back(axis_rect(u0, -hd + off, z0, 0, bw, 2, bh)); break;
                default: board_rects.push_back(axis_rect(u0, hd - off, z0, 0, bw, 2, bh)); break;
            }
        }

        std::vector<Rect> clutter;
        for (int c = 0; c < spec.clutter_objects; ++c) {
            const double sx = 0.3 + uni(rng) * 0.5;
            const double sy = 0.3 + uni(rng) * 0.5;
            const double sz = 0.3 + uni(rng) * 0.7;
            const double cx = -hw + 0.5 + uni(rng) * std::max(0.1, W - 1.0 - sx);
            const double cy = -hd + 0.5 + uni(rng) * std::max(0.1, D - 1.0 - sy);
            // box sides (top + 4 verticals)
            clutter.push_back(axis_rect(cx, cy, sz, 0, sx, 1, sy));
            clutter.push_back(axis_rect(cx, cy, 0, 1, sy, 2, sz));
            clutter.push_back(axis_rect(cx + sx, cy, 0, 1, sy, 2, sz));
            clutter.push_back(axis_rect(cx, cy, 0, 0, sx, 2, sz));
            clutter.push_back(axis_rect(cx, cy + sy, 0, 0, sx, 2, sz));
        }

        const int n = spec.points_per_scene;
        int counts[5];
        int assigned = 0;
        for (int c = 0; c < 4; ++c) {
            counts[c] = static_cast<int>(std::lround(spec.class_fractions[c] * n));
            assigned += counts[c];
        }
        counts[4] = n - assigned;

        LabeledCloud cloud;
        cloud.points.coords.reserve(static_cast<size_t>(n) * 3);
        cloud.labels.reserve(n);
        sample_class(floor, counts[0], 0, rng, cloud.points.coords, cloud.labels);
        sample_class(ceiling, counts[1], 1, rng, cloud.points.coords, cloud.labels);
        sample_class(walls, counts[2], 2, rng, cloud.points.coords, cloud.labels);
        sample_class(board_rects, counts[3], 3, rng, cloud.points.coords, cloud.labels);
        sample_class(clutter, counts[4], 4, rng, cloud.points.coords, cloud.labels);

        if (spec.noise_sigma > 0) {
            std::normal_distribution<double> noise(0.0, spec.noise_sigma);
            for (double& v : cloud.points.coords) v += noise(rng);
        }
        scenes.push_back(std::move(cloud));
    }
    return scenes;
}

}  // namespace dgfa
