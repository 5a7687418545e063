#include "core/model.hpp"

#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace addunet {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::RealAdditive: return "real_additive";
        case Variant::PseudoAdditive: return "pseudo_additive";
        case Variant::DnCNN: return "dncnn";
    }
    throw UsageError("variant_name: bad enum value");
}

Variant variant_from_name(const std::string& s) {
    if (s == "real_additive") return Variant::RealAdditive;
    if (s == "pseudo_additive") return Variant::PseudoAdditive;
    if (s == "dncnn") return Variant::DnCNN;
    throw UsageError("unknown model variant '" + s +
                     "' (expected real_additive, pseudo_additive or dncnn)");
}

void ModelConfig::validate() const {
    if (depth < 1) throw UsageError("model config: depth must be >= 1");
    if (channels < 1) throw UsageError("model config: channels must be >= 1");
    if (variant != Variant::DnCNN) {
        if (static_cast<int>(kernels.size()) != depth)
            throw UsageError("model config: kernel schedule has " +
                             std::to_string(kernels.size()) + " entries, depth is " +
                             std::to_string(depth));
        for (int k : kernels) {
            if (k < 1 || k % 2 == 0)
                throw UsageError("model config: kernel sizes must be odd and >= 1, got " +
                                 std::to_string(k));
        }
    }
}

std::string ModelConfig::table_id() const {
    if (variant == Variant::DnCNN) return "DnCNN-" + std::to_string(depth);
    std::ostringstream os;
    os << (variant == Variant::RealAdditive ? "R-AddU" : "P-AddU");
    os << " (" << depth << ", ";
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        if (i) os << "-";
        os << kernels[i];
    }
    os << ")";
    return os.str();
}

namespace {

constexpr int kDncnnKernel = 3;

ConvParam make_conv(int cout, int cin, int k) {
    ConvParam p;
    p.weight = Tensor::zeros({cout, cin, k, k});
    p.bias = Tensor::zeros({cout});
    p.weight.set_requires_grad(true);
    p.bias.set_requires_grad(true);
    return p;
}

void init_conv(ConvParam& p, Rng& rng) {
    const double fan_in = static_cast<double>(p.weight.dim(1) * p.weight.dim(2) * p.weight.dim(3));
    const double bound = 1.0 / std::sqrt(fan_in);
    for (double& v : p.weight.data()) v = rng.uniform(-bound, bound);
    for (double& v : p.bias.data()) v = rng.uniform(-bound, bound);
}

Tensor block_forward(const BlockParams& blk, const Tensor& x) {
    Tensor h = conv2d(x, blk.conv1.weight, blk.conv1.bias, blk.conv1.kernel() / 2);
    h = relu(h);
    return conv2d(h, blk.conv2.weight, blk.conv2.bias, blk.conv2.kernel() / 2);
}

} // namespace

Model::Model(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const int L = config_.depth;
    const int C = config_.channels;
    if (config_.variant == Variant::DnCNN) {
        dncnn_.reserve(static_cast<std::size_t>(L));
        for (int i = 0; i < L; ++i) {
            const int cin = (i == 0) ? 1 : C;
            const int cout = (i == L - 1) ? 1 : C;
            dncnn_.push_back(make_conv(cout, cin, kDncnnKernel));
        }
    } else {
        stem_ = make_conv(C, 1, 3);
        enc_.reserve(static_cast<std::size_t>(L));
        dec_.reserve(static_cast<std::size_t>(L));
        for (int i = 0; i < L; ++i) {
            const int k = config_.kernels[static_cast<std::size_t>(i)];
            enc_.push_back({make_conv(C, C, k), make_conv(C, C, k)});
        }
        // Dec_j mirrors the kernel of the encoder whose residual it consumes (k_{L-j})
        for (int j = 0; j < L; ++j) {
            const int k = config_.kernels[static_cast<std::size_t>(L - 1 - j)];
            dec_.push_back({make_conv(C, C, k), make_conv(C, C, k)});
        }
        if (config_.variant == Variant::RealAdditive) {
            beta_.reserve(static_cast<std::size_t>(L));
            for (int j = 0; j < L; ++j) {
                // beta_j = 0 starts every gate at alpha = ln 2 (half open)
                Tensor b = Tensor::scalar(0.0);
                b.set_requires_grad(true);
                beta_.push_back(b);
            }
        }
        head_ = make_conv(1, C, 1);
    }
    register_params();
    init_params();
}

void Model::register_params() {
    params_.clear();
    auto reg_conv = [this](const std::string& name, ConvParam& p) {
        params_.emplace_back(name + ".weight", p.weight);
        params_.emplace_back(name + ".bias", p.bias);
    };
    if (config_.variant == Variant::DnCNN) {
        for (std::size_t i = 0; i < dncnn_.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "layer%02zu", i);
            reg_conv(buf, dncnn_[i]);
        }
        return;
    }
    reg_conv("stem", stem_);
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        reg_conv("enc" + std::to_string(i + 1) + ".conv1", enc_[i].conv1);
        reg_conv("enc" + std::to_string(i + 1) + ".conv2", enc_[i].conv2);
    }
    for (std::size_t j = 0; j < dec_.size(); ++j) {
        reg_conv("dec" + std::to_string(j) + ".conv1", dec_[j].conv1);
        reg_conv("dec" + std::to_string(j) + ".conv2", dec_[j].conv2);
    }
    for (std::size_t j = 0; j < beta_.size(); ++j)
        params_.emplace_back("beta" + std::to_string(j), beta_[j]);
    reg_conv("head", head_);
}

void Model::init_params() {
    // One sequential uniform stream in structural order; each conv uses its
    // own fan-in bound. Gates stay at beta = 0.
    Rng rng(mix_seed({config_.seed, 0x696e6974ULL /* "init" */}));
    if (config_.variant == Variant::DnCNN) {
        for (auto& l : dncnn_) init_conv(l, rng);
        return;
    }
    init_conv(stem_, rng);
    for (auto& b : enc_) {
        init_conv(b.conv1, rng);
        init_conv(b.conv2, rng);
    }
    for (auto& b : dec_) {
        init_conv(b.conv1, rng);
        init_conv(b.conv2, rng);
    }
    init_conv(head_, rng);
}

ConvParam& Model::stem() {
    if (config_.variant == Variant::DnCNN) throw UsageError("stem(): DnCNN has no stem");
    return stem_;
}
std::vector<BlockParams>& Model::enc_blocks() {
    if (config_.variant == Variant::DnCNN) throw UsageError("enc_blocks(): not a U-Net variant");
    return enc_;
}
const std::vector<BlockParams>& Model::enc_blocks() const {
    if (config_.variant == Variant::DnCNN) throw UsageError("enc_blocks(): not a U-Net variant");
    return enc_;
}
std::vector<BlockParams>& Model::dec_blocks() {
    if (config_.variant == Variant::DnCNN) throw UsageError("dec_blocks(): not a U-Net variant");
    return dec_;
}
std::vector<Tensor>& Model::betas() {
    if (config_.variant != Variant::RealAdditive)
        throw UsageError("betas(): gates exist only on the real-additive variant");
    return beta_;
}
ConvParam& Model::head() {
    if (config_.variant == Variant::DnCNN) throw UsageError("head(): DnCNN has no head");
    return head_;
}
std::vector<ConvParam>& Model::dncnn_layers() {
    if (config_.variant != Variant::DnCNN) throw UsageError("dncnn_layers(): not a DnCNN model");
    return dncnn_;
}

std::vector<double> Model::gate_values() const {
    if (config_.variant != Variant::RealAdditive)
        throw UsageError("gate_values(): gates exist only on the real-additive variant");
    std::vector<double> alphas;
    alphas.reserve(beta_.size());
    for (const Tensor& b : beta_) alphas.push_back(kernels::softplus_scalar(b.data()[0]));
    return alphas;
}

ForwardTrace Model::forward_unet(const Tensor& x, const ForwardOptions& opts, bool subtractive) const {
    if (x.ndim() != 4 || x.dim(1) != 1)
        throw UsageError("forward: input must be [B,1,H,W], got channel count " +
                         (x.ndim() == 4 ? std::to_string(x.dim(1)) : std::string("?")));
    const int L = config_.depth;
    ForwardTrace tr;

    Tensor cur = conv2d(x, stem_.weight, stem_.bias, 1); // x_0
    tr.enc_states.push_back(cur);
    for (int i = 0; i < L; ++i) {
        Tensor r = block_forward(enc_[static_cast<std::size_t>(i)], cur);
        tr.residuals.push_back(r);
        cur = subtractive ? sub(cur, r) : r;
        tr.enc_states.push_back(cur);
    }

    Tensor u = cur; // u_0 = x_L (bottleneck state)
    tr.dec_states.push_back(u);
    for (int j = 0; j < L; ++j) {
        const Tensor& skip = tr.residuals[static_cast<std::size_t>(L - 1 - j)];
        Tensor fused;
        if (config_.variant == Variant::PseudoAdditive) {
            fused = add(u, skip); // unit, non-learnable skip scale
        } else {
            const double* forced = nullptr;
            for (const auto& [idx, v] : opts.alpha_overrides)
                if (idx == j) forced = &v;
            if (forced) {
                fused = add(u, scalar_mul(*forced, skip));
            } else {
                Tensor alpha = softplus(beta_[static_cast<std::size_t>(j)]);
                fused = add(u, scalar_mul(alpha, skip));
            }
        }
        u = block_forward(dec_[static_cast<std::size_t>(j)], fused);
        tr.dec_states.push_back(u);
    }
    tr.y = conv2d(u, head_.weight, head_.bias, 0);
    return tr;
}

ForwardTrace Model::forward_dncnn(const Tensor& x) const {
    if (x.ndim() != 4 || x.dim(1) != 1)
        throw UsageError("forward: input must be [B,1,H,W]");
    ForwardTrace tr;
    Tensor h = x;
    const std::size_t n = dncnn_.size();
    for (std::size_t i = 0; i < n; ++i) {
        h = conv2d(h, dncnn_[i].weight, dncnn_[i].bias, kDncnnKernel / 2);
        if (i + 1 < n) h = relu(h);
    }
    tr.residuals.push_back(h); // predicted noise
    tr.y = sub(x, h);
    return tr;
}

ForwardTrace Model::forward_traced(const Tensor& x, const ForwardOptions& opts) const {
    switch (config_.variant) {
        case Variant::RealAdditive:
            return forward_unet(x, opts, !opts.disable_subtraction);
        case Variant::PseudoAdditive:
            return forward_unet(x, opts, false);
        case Variant::DnCNN:
            return forward_dncnn(x);
    }
    throw UsageError("forward: bad variant");
}

Tensor Model::forward(const Tensor& x, const ForwardOptions& opts) const {
    return forward_traced(x, opts).y;
}

std::int64_t Model::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

void Model::load_parameters(const std::vector<std::pair<std::string, Tensor>>& named) {
    for (const auto& [name, src] : named) {
        bool found = false;
        for (auto& [pname, dst] : params_) {
            if (pname != name) continue;
            if (dst.shape() != src.shape())
                throw DataError("load_parameters: shape mismatch for '" + name + "'");
            dst.data() = src.data();
            found = true;
            break;
        }
        if (!found) throw DataError("load_parameters: unknown parameter '" + name + "'");
    }
}

std::vector<std::pair<std::string, Tensor>> Model::spectra_layers() const {
    std::vector<std::pair<std::string, Tensor>> layers;
    if (config_.variant == Variant::DnCNN) {
        for (std::size_t i = 0; i < dncnn_.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "layer%02zu", i);
            layers.emplace_back(buf, dncnn_[i].weight);
        }
        return layers;
    }
    layers.emplace_back("stem", stem_.weight);
    for (std::size_t i = 0; i < enc_.size(); ++i)
        layers.emplace_back("enc" + std::to_string(i + 1), enc_[i].conv1.weight);
    return layers;
}

std::int64_t expected_parameter_count(const ModelConfig& config) {
    const std::int64_t C = config.channels;
    if (config.variant == Variant::DnCNN) {
        const std::int64_t d = config.depth;
        std::int64_t n = C * 1 * 9 + C;                // first
        n += (d - 2) * (C * C * 9 + C);                // middle
        n += 1 * C * 9 + 1;                            // last
        return n;
    }
    std::int64_t n = C * 1 * 3 * 3 + C;                // stem
    for (int k : config.kernels)
        n += 2 * 2 * (C * C * static_cast<std::int64_t>(k) * k + C); // enc+dec blocks, 2 convs each
    if (config.variant == Variant::RealAdditive) n += config.depth;  // betas
    n += 1 * C * 1 * 1 + 1;                            // head
    return n;
}

} // namespace addunet
