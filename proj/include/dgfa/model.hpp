#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgfa/graphgen.hpp"
#include "dgfa/tape.hpp"

namespace dgfa {

enum class DgfaMode { Off, NoDense, Dense };

DgfaMode dgfa_mode_from_string(const std::string& s);
std::string to_string(DgfaMode m);

struct ModelConfig {
    int input_channels = 3;
    int stem_width = 32;
    std::vector<int> encoder_widths = {64, 128, 256};  // levels 1..3
    std::vector<int> dgfa_rates = {1, 2, 4, 8};
    int dgfa_block_width = 64;
    int dgfa_out_width = 256;
    int dgfa_k = 8;
    int dgfa_step = 4;
    DgfaMode dgfa_mode = DgfaMode::Dense;
    std::vector<int> decoder_widths = {128, 64, 32};  // for levels 2, 1, 0
    int class_count = 5;

    void validate() const;
    // Input width of DGFA block m (1-based) and of the fusion perceptron.
    int dgfa_block_input(int m) const;
    int dgfa_fuse_input() const;
};

// Logits at each resolution, level 0 (finest) .. level 3 (coarsest). Raw
// logits; softmax is applied inside the loss.
struct PyramidVars {
    std::vector<Tape::Var> logits;  // indexed by level
};

// --- building blocks (tape-level) ---

// x~_i = max_j Theta([x_i ; x_j - x_i]) over the graph's neighbors.
Tape::Var dgconv(Tape& t, Tape::Var feats, const std::vector<NeighborList>& graph,
                 Tape::Var w, Tape::Var b);

// Attention convolution at the fine level followed by max-pooling through the
// mapping graph. alpha_ij = softmax_j(affine([dp_ij ; x_j - x_i]));
// out_i = relu(sum_j alpha_ij (W x_j + b)), then per-coarse-point max.
Tape::Var encoder_block(Tape& t, Tape::Var feats, const PointSet& fine_points,
                        const std::vector<NeighborList>& level_graph,
                        const std::vector<NeighborList>& mapping, Tape::Var att_w,
                        Tape::Var att_b, Tape::Var w, Tape::Var b);

// Inverse-distance-weighted interpolation over the 3 nearest coarse points
// (1/d^2 weights, normalized; an exact hit copies that point).
Tape::Var propagate(Tape& t, Tape::Var coarse_feats, const PointSet& coarse,
                    const PointSet& fine);

struct DgfaBlockParams {
    Tape::Var w, b;
};

// Densely connected multi-dilation aggregation. blocks[m] convolves the
// concatenation of the input and all earlier outputs (dense) or just the
// previous output (nodense); the fusion perceptron reads the concatenation of
// everything either way.
Tape::Var dgfa(Tape& t, Tape::Var feats, const DilatedGraphSet& graphs,
               const std::vector<DgfaBlockParams>& blocks, Tape::Var fuse_w, Tape::Var fuse_b,
               bool dense);

Tape::Var maloss(Tape& t, const PyramidVars& out, const LabelPyramid& labels,
                 const std::vector<double>& lambdas, bool mean_reduction);

// --- the network ---

class DgfaNet {
public:
    DgfaNet(ModelConfig cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Runs the full encoder / DGFA / pyramid-decoder pass. param_ids must come
    // from params().stage(t).
    PyramidVars forward(Tape& t, const std::vector<Tape::Var>& param_ids, const Tensor& features,
                        const Hierarchy& h, const DilatedGraphSet& graphs) const;

    // Features of the last upsampling layer (level-0 fused features).
    Tape::Var last_upsample(Tape& t, const std::vector<Tape::Var>& param_ids,
                            const Tensor& features, const Hierarchy& h,
                            const DilatedGraphSet& graphs) const;

    // Argmax over the finest-level logits; coarser heads unused at inference.
    std::vector<int> predict(const Tensor& features, const Hierarchy& h,
                             const DilatedGraphSet& graphs) const;

private:
    struct Activations {
        std::vector<Tape::Var> skip;   // F_{i,0} per level
        std::vector<Tape::Var> fused;  // F_{i,1} per level (fused[3] is the DGFA output)
        PyramidVars logits;
    };
    Tape::Var p(const std::vector<Tape::Var>& ids, const std::string& name) const;
    Activations run(Tape& t, const std::vector<Tape::Var>& param_ids, const Tensor& features,
                    const Hierarchy& h, const DilatedGraphSet& graphs) const;

    ModelConfig cfg_;
    ParamStore params_;
};

// Per-point class labels via argmax, ties to the lowest class index.
std::vector<int> argmax_rows(const Tensor& logits);

// Input feature tensor for a cloud: xyz coordinates, optionally followed by
// extra channels (rgb).
Tensor make_features(const PointSet& points, const std::vector<double>& extra_channels,
                     int input_channels);

}  // namespace dgfa
