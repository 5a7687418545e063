#include "core/optim.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace addunet {

Adam::Adam(const std::vector<std::pair<std::string, Tensor>>& params, AdamConfig config)
    : config_(config) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& [name, t] : params) {
        (void)name;
        m_.emplace_back(t.numel(), 0.0);
        v_.emplace_back(t.numel(), 0.0);
    }
}

void Adam::step(std::vector<std::pair<std::string, Tensor>>& params) {
    if (params.size() != m_.size())
        throw UsageError("adam: parameter list does not match optimizer state");
    for (const auto& [name, t] : params) {
        if (!t.has_grad())
            throw UsageError("adam: missing gradient for parameter '" + name + "'");
    }
    ++step_count_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = params[p].second;
        const std::vector<double>& g = t.grad();
        std::vector<double>& w = t.data();
        std::vector<double>& m = m_[p];
        std::vector<double>& v = v_[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

void Adam::zero_grad(std::vector<std::pair<std::string, Tensor>>& params) {
    for (auto& [name, t] : params) {
        (void)name;
        t.zero_grad();
    }
}

} // namespace addunet
