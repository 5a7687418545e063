#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"

namespace addunet {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 0) throw UsageError("tensor shape extents must be non-negative");
        n *= d;
    }
    return n;
}

std::string shape_str(const std::vector<std::int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw UsageError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
}

void ensure_grad(TensorImpl& t) {
    if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0);
}

// True when the op must be recorded: a tape is active and some input tracks
// gradients.
bool tracking(std::initializer_list<const Tensor*> inputs) {
    if (!Tape::active()) return false;
    for (const Tensor* t : inputs)
        if ((*t).requires_grad()) return true;
    return false;
}

} // namespace

// --- Tensor -----------------------------------------------------------------

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
    auto impl = std::make_shared<TensorImpl>();
    std::int64_t n = shape_numel(shape);
    impl->shape = std::move(shape);
    impl->data.assign(static_cast<std::size_t>(n), 0.0);
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.data().begin(), t.data().end(), value);
    return t;
}

Tensor Tensor::from_data(std::vector<std::int64_t> shape, std::vector<double> data) {
    std::int64_t n = shape_numel(shape);
    if (n != static_cast<std::int64_t>(data.size()))
        throw UsageError("from_data: buffer has " + std::to_string(data.size()) +
                         " elements, shape " + shape_str(shape) + " needs " + std::to_string(n));
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

double Tensor::item() const {
    if (numel() != 1) throw UsageError("item(): tensor has " + std::to_string(numel()) + " elements");
    return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool value) {
    impl_->requires_grad = value;
    return *this;
}

std::vector<double>& Tensor::grad() {
    ensure_grad(*impl_);
    return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
    ensure_grad(*impl_);
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (impl_ && !impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = impl_->shape;
    impl->data = impl_->data;
    impl->grad = impl_->grad;
    impl->requires_grad = impl_->requires_grad;
    return Tensor(std::move(impl));
}

// --- Tape -------------------------------------------------------------------

Tape::Scope::Scope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
Tape::Scope::~Scope() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

std::int64_t Tape::record(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
    return static_cast<std::int64_t>(nodes_.size()) - 1;
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw UsageError("backward: loss must be a scalar tensor");
    if (loss.impl()->node < 0)
        throw UsageError("backward: loss was not produced under an active tape");
    ensure_grad(*loss.impl());
    loss.impl()->grad[0] += 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) nodes_[i]();
}

void Tape::clear() { nodes_.clear(); }

void backward(const Tensor& loss) {
    Tape* tape = Tape::active();
    if (!tape) throw UsageError("backward: no active tape");
    tape->backward(loss);
}

// --- conv2d kernels ----------------------------------------------------------

namespace kernels {

void conv2d_forward(const double* in, const double* w, const double* b, double* out,
                    std::int64_t B, std::int64_t Ci, std::int64_t H, std::int64_t W,
                    std::int64_t Co, std::int64_t k, std::int64_t pad) {
    const std::int64_t HW = H * W;
    const std::int64_t k2 = k * k;
    for (std::int64_t bi = 0; bi < B; ++bi) {
        for (std::int64_t co = 0; co < Co; ++co) {
            double* op = out + (bi * Co + co) * HW;
            const double bv = b ? b[co] : 0.0;
            std::fill(op, op + HW, bv);
            for (std::int64_t ci = 0; ci < Ci; ++ci) {
                const double* ip = in + (bi * Ci + ci) * HW;
                const double* wp = w + (co * Ci + ci) * k2;
                for (std::int64_t ky = 0; ky < k; ++ky) {
                    const std::int64_t dy = ky - pad;
                    const std::int64_t y0 = std::max<std::int64_t>(0, -dy);
                    const std::int64_t y1 = std::min<std::int64_t>(H, H - dy);
                    for (std::int64_t kx = 0; kx < k; ++kx) {
                        const std::int64_t dx = kx - pad;
                        const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
                        const std::int64_t x1 = std::min<std::int64_t>(W, W - dx);
                        const double wv = wp[ky * k + kx];
                        if (wv == 0.0) continue;
                        for (std::int64_t y = y0; y < y1; ++y) {
                            const double* src = ip + (y + dy) * W + dx;
                            double* dst = op + y * W;
                            for (std::int64_t x = x0; x < x1; ++x) dst[x] += wv * src[x];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward_input(const double* gout, const double* w, double* gin,
                           std::int64_t B, std::int64_t Ci, std::int64_t H, std::int64_t W,
                           std::int64_t Co, std::int64_t k, std::int64_t pad) {
    const std::int64_t HW = H * W;
    const std::int64_t k2 = k * k;
    for (std::int64_t bi = 0; bi < B; ++bi) {
        for (std::int64_t ci = 0; ci < Ci; ++ci) {
            double* gp = gin + (bi * Ci + ci) * HW;
            for (std::int64_t co = 0; co < Co; ++co) {
                const double* op = gout + (bi * Co + co) * HW;
                const double* wp = w + (co * Ci + ci) * k2;
                for (std::int64_t ky = 0; ky < k; ++ky) {
                    const std::int64_t dy = ky - pad;
                    const std::int64_t y0 = std::max<std::int64_t>(0, -dy);
                    const std::int64_t y1 = std::min<std::int64_t>(H, H - dy);
                    for (std::int64_t kx = 0; kx < k; ++kx) {
                        const std::int64_t dx = kx - pad;
                        const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
                        const std::int64_t x1 = std::min<std::int64_t>(W, W - dx);
                        const double wv = wp[ky * k + kx];
                        if (wv == 0.0) continue;
                        for (std::int64_t y = y0; y < y1; ++y) {
                            const double* src = op + y * W;
                            double* dst = gp + (y + dy) * W + dx;
                            for (std::int64_t x = x0; x < x1; ++x) dst[x] += wv * src[x];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward_weight(const double* gout, const double* in, double* gw,
                            std::int64_t B, std::int64_t Ci, std::int64_t H, std::int64_t W,
                            std::int64_t Co, std::int64_t k, std::int64_t pad) {
    const std::int64_t HW = H * W;
    const std::int64_t k2 = k * k;
    for (std::int64_t co = 0; co < Co; ++co) {
        for (std::int64_t ci = 0; ci < Ci; ++ci) {
            double* wp = gw + (co * Ci + ci) * k2;
            for (std::int64_t ky = 0; ky < k; ++ky) {
                const std::int64_t dy = ky - pad;
                const std::int64_t y0 = std::max<std::int64_t>(0, -dy);
                const std::int64_t y1 = std::min<std::int64_t>(H, H - dy);
                for (std::int64_t kx = 0; kx < k; ++kx) {
                    const std::int64_t dx = kx - pad;
                    const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
                    const std::int64_t x1 = std::min<std::int64_t>(W, W - dx);
                    double acc = 0.0;
                    for (std::int64_t bi = 0; bi < B; ++bi) {
                        const double* op = gout + (bi * Co + co) * HW;
                        const double* ip = in + (bi * Ci + ci) * HW;
                        for (std::int64_t y = y0; y < y1; ++y) {
                            const double* a = op + y * W;
                            const double* c = ip + (y + dy) * W + dx;
                            double row = 0.0;
                            for (std::int64_t x = x0; x < x1; ++x) row += a[x] * c[x];
                            acc += row;
                        }
                    }
                    wp[ky * k + kx] += acc;
                }
            }
        }
    }
}

void conv2d_backward_bias(const double* gout, double* gb,
                          std::int64_t B, std::int64_t Co, std::int64_t HW) {
    for (std::int64_t bi = 0; bi < B; ++bi) {
        for (std::int64_t co = 0; co < Co; ++co) {
            const double* op = gout + (bi * Co + co) * HW;
            double acc = 0.0;
            for (std::int64_t i = 0; i < HW; ++i) acc += op[i];
            gb[co] += acc;
        }
    }
}

double softplus_scalar(double x) {
    // max(x,0) + log1p(exp(-|x|)) never overflows and keeps full precision
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

} // namespace kernels

// --- ops ----------------------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding) {
    if (input.ndim() != 4)
        throw UsageError("conv2d: input must be 4-D [B,Cin,H,W], got " + shape_str(input.shape()));
    if (weight.ndim() != 4)
        throw UsageError("conv2d: weight must be 4-D [Cout,Cin,k,k], got " + shape_str(weight.shape()));
    if (bias.ndim() != 1)
        throw UsageError("conv2d: bias must be 1-D [Cout], got " + shape_str(bias.shape()));
    const std::int64_t B = input.dim(0), Ci = input.dim(1), H = input.dim(2), W = input.dim(3);
    const std::int64_t Co = weight.dim(0), k = weight.dim(2);
    if (weight.dim(1) != Ci)
        throw UsageError("conv2d: weight expects " + std::to_string(weight.dim(1)) +
                         " input channels, input has " + std::to_string(Ci));
    if (weight.dim(3) != k)
        throw UsageError("conv2d: kernel must be square, got " + shape_str(weight.shape()));
    if (k % 2 == 0) throw UsageError("conv2d: kernel size must be odd, got " + std::to_string(k));
    if (bias.dim(0) != Co)
        throw UsageError("conv2d: bias has " + std::to_string(bias.dim(0)) +
                         " entries, expected " + std::to_string(Co));
    if (padding != k / 2)
        throw UsageError("conv2d: padding must be k/2 for same-size output (k=" +
                         std::to_string(k) + ", padding=" + std::to_string(padding) + ")");

    Tensor out = Tensor::zeros({B, Co, H, W});
    kernels::conv2d_forward(input.data().data(), weight.data().data(), bias.data().data(),
                            out.data().data(), B, Ci, H, W, Co, k, padding);

    if (tracking({&input, &weight, &bias})) {
        out.set_requires_grad(true);
        auto ii = input.impl(), wi = weight.impl(), bi_ = bias.impl(), oi = out.impl();
        oi->node = Tape::active()->record([ii, wi, bi_, oi, B, Ci, H, W, Co, k, padding] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ii->requires_grad) {
                ensure_grad(*ii);
                kernels::conv2d_backward_input(g, wi->data.data(), ii->grad.data(),
                                               B, Ci, H, W, Co, k, padding);
            }
            if (wi->requires_grad) {
                ensure_grad(*wi);
                kernels::conv2d_backward_weight(g, ii->data.data(), wi->grad.data(),
                                                B, Ci, H, W, Co, k, padding);
            }
            if (bi_->requires_grad) {
                ensure_grad(*bi_);
                kernels::conv2d_backward_bias(g, bi_->grad.data(), B, Co, H * W);
            }
        });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.data().size();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];

    if (tracking({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        oi->node = Tape::active()->record([ai, bi, oi] {
            if (oi->grad.empty()) return;
            if (ai->requires_grad) {
                ensure_grad(*ai);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i];
            }
            if (bi->requires_grad) {
                ensure_grad(*bi);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) bi->grad[i] += oi->grad[i];
            }
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.data().size();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];

    if (tracking({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        oi->node = Tape::active()->record([ai, bi, oi] {
            if (oi->grad.empty()) return;
            if (ai->requires_grad) {
                ensure_grad(*ai);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i];
            }
            if (bi->requires_grad) {
                ensure_grad(*bi);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) bi->grad[i] -= oi->grad[i];
            }
        });
    }
    return out;
}

Tensor scalar_mul(const Tensor& s, const Tensor& x) {
    if (s.numel() != 1) throw UsageError("scalar_mul: scale must have exactly 1 element");
    const double sv = s.data()[0];
    Tensor out = Tensor::zeros(x.shape());
    const std::size_t n = x.data().size();
    const double* px = x.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) po[i] = sv * px[i];

    if (tracking({&s, &x})) {
        out.set_requires_grad(true);
        auto si = s.impl(), xi = x.impl(), oi = out.impl();
        oi->node = Tape::active()->record([si, xi, oi, sv] {
            if (oi->grad.empty()) return;
            if (xi->requires_grad) {
                ensure_grad(*xi);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += sv * oi->grad[i];
            }
            if (si->requires_grad) {
                ensure_grad(*si);
                double acc = 0.0;
                for (std::size_t i = 0; i < oi->grad.size(); ++i) acc += oi->grad[i] * xi->data[i];
                si->grad[0] += acc;
            }
        });
    }
    return out;
}

Tensor scalar_mul(double s, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const std::size_t n = x.data().size();
    const double* px = x.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) po[i] = s * px[i];

    if (tracking({&x})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), oi = out.impl();
        oi->node = Tape::active()->record([xi, oi, s] {
            if (oi->grad.empty()) return;
            if (xi->requires_grad) {
                ensure_grad(*xi);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += s * oi->grad[i];
            }
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const std::size_t n = x.data().size();
    const double* px = x.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) po[i] = px[i] > 0.0 ? px[i] : 0.0;

    if (tracking({&x})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), oi = out.impl();
        oi->node = Tape::active()->record([xi, oi] {
            if (oi->grad.empty()) return;
            if (xi->requires_grad) {
                ensure_grad(*xi);
                for (std::size_t i = 0; i < oi->grad.size(); ++i)
                    if (xi->data[i] > 0.0) xi->grad[i] += oi->grad[i];
            }
        });
    }
    return out;
}

Tensor softplus(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const std::size_t n = x.data().size();
    const double* px = x.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < n; ++i) po[i] = kernels::softplus_scalar(px[i]);

    if (tracking({&x})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), oi = out.impl();
        oi->node = Tape::active()->record([xi, oi] {
            if (oi->grad.empty()) return;
            if (xi->requires_grad) {
                ensure_grad(*xi);
                for (std::size_t i = 0; i < oi->grad.size(); ++i) {
                    const double sig = 1.0 / (1.0 + std::exp(-xi->data[i]));
                    xi->grad[i] += sig * oi->grad[i];
                }
            }
        });
    }
    return out;
}

Tensor mean(const Tensor& x) {
    const std::int64_t n = x.numel();
    if (n == 0) throw UsageError("mean: empty tensor");
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    Tensor out = Tensor::scalar(acc / static_cast<double>(n));

    if (tracking({&x})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), oi = out.impl();
        oi->node = Tape::active()->record([xi, oi, n] {
            if (oi->grad.empty()) return;
            if (xi->requires_grad) {
                ensure_grad(*xi);
                const double g = oi->grad[0] / static_cast<double>(n);
                for (std::size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += g;
            }
        });
    }
    return out;
}

Tensor charbonnier(const Tensor& pred, const Tensor& target, double epsilon) {
    check_same_shape(pred, target, "charbonnier");
    if (!(epsilon > 0.0)) throw UsageError("charbonnier: epsilon must be > 0");
    const std::int64_t n = pred.numel();
    if (n == 0) throw UsageError("charbonnier: empty tensor");
    const double eps2 = epsilon * epsilon;
    const double* pp = pred.data().data();
    const double* pt = target.data().data();
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = pp[i] - pt[i];
        acc += std::sqrt(d * d + eps2);
    }
    Tensor out = Tensor::scalar(acc / static_cast<double>(n));

    if (tracking({&pred, &target})) {
        out.set_requires_grad(true);
        auto pi = pred.impl(), ti = target.impl(), oi = out.impl();
        oi->node = Tape::active()->record([pi, ti, oi, n, eps2] {
            if (oi->grad.empty()) return;
            const double g = oi->grad[0] / static_cast<double>(n);
            for (std::int64_t i = 0; i < n; ++i) {
                const double d = pi->data[i] - ti->data[i];
                const double dd = g * d / std::sqrt(d * d + eps2);
                if (pi->requires_grad) {
                    ensure_grad(*pi);
                    pi->grad[i] += dd;
                }
                if (ti->requires_grad) {
                    ensure_grad(*ti);
                    ti->grad[i] -= dd;
                }
            }
        });
    }
    return out;
}

} // namespace addunet
