#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace addunet {

class Tape;

struct TensorImpl {
    std::vector<std::int64_t> shape;
    std::vector<double> data;   // row-major, product(shape) elements
    std::vector<double> grad;   // empty until touched, then data.size() zeros
    bool requires_grad = false;
    std::int64_t node = -1;     // producer node in the tape that recorded it
};

// Value-semantics handle to shared tensor storage. Copies alias the same
// buffer; clone() deep-copies.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::int64_t> shape);
    static Tensor full(std::vector<std::int64_t> shape, double value);
    static Tensor from_data(std::vector<std::int64_t> shape, std::vector<double> data);
    static Tensor scalar(double value); // shape {1}

    bool defined() const { return impl_ != nullptr; }
    const std::vector<std::int64_t>& shape() const { return impl_->shape; }
    std::int64_t dim(int i) const { return impl_->shape.at(static_cast<std::size_t>(i)); }
    int ndim() const { return static_cast<int>(impl_->shape.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(impl_->data.size()); }

    std::vector<double>& data() { return impl_->data; }
    const std::vector<double>& data() const { return impl_->data; }
    double item() const; // throws unless numel()==1

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool value);

    // Gradient buffer, allocated (zeroed) on first access.
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    bool has_grad() const { return impl_ && !impl_->grad.empty(); }
    void zero_grad();

    Tensor clone() const;

    std::shared_ptr<TensorImpl> impl() const { return impl_; }

private:
    explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<TensorImpl> impl_;

    friend class Tape;
};

// Reverse-mode tape. Ops record a backward closure per node; backward() seeds
// the scalar loss with 1 and replays the closures in reverse topological
// order (which is just recording order), visiting each node exactly once.
// One tape per training step; not shareable across threads.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // RAII activation: ops record onto the innermost active tape.
    class Scope {
    public:
        explicit Scope(Tape& tape);
        ~Scope();
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Tape* previous_;
    };

    static Tape* active();

    std::int64_t record(std::function<void()> backward_fn);
    void backward(const Tensor& loss);
    void clear();
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<std::function<void()>> nodes_;
};

// --- differentiable ops -----------------------------------------------------

// Same-size 2-D cross-correlation (no kernel flip), zero padding.
// input [B,Cin,H,W], weight [Cout,Cin,k,k] with k odd, bias [Cout],
// padding must equal k/2 so output is [B,Cout,H,W].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& s, const Tensor& x); // s has exactly 1 element
Tensor scalar_mul(double s, const Tensor& x);        // constant scale, no grad to s
Tensor relu(const Tensor& x);
Tensor softplus(const Tensor& x); // ln(1 + e^x), stable for large |x|
Tensor mean(const Tensor& x);     // over all elements -> shape {1}

// mean over elements of sqrt((pred - target)^2 + epsilon^2); epsilon > 0
Tensor charbonnier(const Tensor& pred, const Tensor& target, double epsilon);

// Backpropagate from a scalar loss through the active tape.
void backward(const Tensor& loss);

// Raw kernels shared by the ops and by tape-free model evaluation.
namespace kernels {

void conv2d_forward(const double* in, const double* w, const double* b, double* out,
                    std::int64_t B, std::int64_t Ci, std::int64_t H, std::int64_t W,
                    std::int64_t Co, std::int64_t k, std::int64_t pad);
void conv2d_backward_input(const double* gout, const double* w, double* gin,
                           std::int64_t B, std::int64_t Ci, std::int64_t H, std::int64_t W,
                           std::int64_t Co, std::int64_t k, std::int64_t pad);
void conv2d_backward_weight(const double* gout, const double* in, double* gw,
                            std::int64_t B, std::int64_t Ci, std::int64_t H, std::int64_t W,
                            std::int64_t Co, std::int64_t k, std::int64_t pad);
void conv2d_backward_bias(const double* gout, double* gb,
                          std::int64_t B, std::int64_t Co, std::int64_t HW);

double softplus_scalar(double x);

} // namespace kernels

} // namespace addunet
