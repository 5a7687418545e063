#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/tensor.hpp"

namespace addunet {

enum class Variant { RealAdditive, PseudoAdditive, DnCNN };

std::string variant_name(Variant v);          // "real_additive", ...
Variant variant_from_name(const std::string&); // throws UsageError on unknown

struct ModelConfig {
    Variant variant = Variant::RealAdditive;
    int depth = 5;                  // L for U-Net variants, layer count for DnCNN
    int channels = 64;              // C
    std::vector<int> kernels;       // per-encoder-block kernel sizes, length == depth (U-Net)
    std::uint64_t seed = 0;

    void validate() const; // throws UsageError
    std::string table_id() const; // "R-AddU (5, 3-3-3-3-3)", "DnCNN-17"
};

struct ConvParam {
    Tensor weight; // [Cout,Cin,k,k]
    Tensor bias;   // [Cout]
    int kernel() const { return static_cast<int>(weight.dim(2)); }
};

// Encoder/decoder block: Conv(k,C->C) -> ReLU -> Conv(k,C->C)
struct BlockParams {
    ConvParam conv1;
    ConvParam conv2;
};

struct ForwardOptions {
    // (gate index, forced alpha) pairs; bypasses softplus for those gates
    std::vector<std::pair<int, double>> alpha_overrides;
    // chain raw encoder activations instead of subtracting them (cross-path
    // oracle for the pseudo-additive baseline)
    bool disable_subtraction = false;
};

struct ForwardTrace {
    Tensor y;
    std::vector<Tensor> residuals;  // r_1..r_L (raw activations a_i when not subtractive)
    std::vector<Tensor> enc_states; // x_0..x_L
    std::vector<Tensor> dec_states; // u_0..u_L
};

// A constructed model: parameters plus the forward rules for its variant.
// Parameters live in a stable named registry (checkpoint + optimizer order).
class Model {
public:
    explicit Model(ModelConfig config); // deterministic init from config.seed

    const ModelConfig& config() const { return config_; }

    // U-Net layout accessors (UsageError for DnCNN)
    ConvParam& stem();
    std::vector<BlockParams>& enc_blocks();
    std::vector<BlockParams>& dec_blocks();
    std::vector<Tensor>& betas(); // gate pre-activations (RealAdditive only)
    ConvParam& head();
    std::vector<ConvParam>& dncnn_layers();
    const std::vector<BlockParams>& enc_blocks() const;

    // alpha_j = softplus(beta_j), all > 0; UsageError unless RealAdditive
    std::vector<double> gate_values() const;

    Tensor forward(const Tensor& x, const ForwardOptions& opts = {}) const;
    ForwardTrace forward_traced(const Tensor& x, const ForwardOptions& opts = {}) const;

    std::vector<std::pair<std::string, Tensor>>& parameters() { return params_; }
    const std::vector<std::pair<std::string, Tensor>>& parameters() const { return params_; }
    std::int64_t parameter_count() const;

    // Copy named tensors into the registry; throws on unknown name/shape mismatch.
    void load_parameters(const std::vector<std::pair<std::string, Tensor>>& named);

    // Conv layers eligible for filter-spectrum analysis: index 0 is the stem,
    // 1..L are the first conv of each encoder block (DnCNN: every layer).
    std::vector<std::pair<std::string, Tensor>> spectra_layers() const;

private:
    void init_params();
    void register_params();
    ForwardTrace forward_unet(const Tensor& x, const ForwardOptions& opts, bool subtractive) const;
    ForwardTrace forward_dncnn(const Tensor& x) const;

    ModelConfig config_;
    ConvParam stem_, head_;
    std::vector<BlockParams> enc_, dec_;
    std::vector<Tensor> beta_;
    std::vector<ConvParam> dncnn_;
    std::vector<std::pair<std::string, Tensor>> params_;
};

// Closed-form parameter count for a config (independent tally lives in tests).
std::int64_t expected_parameter_count(const ModelConfig& config);

} // namespace addunet
