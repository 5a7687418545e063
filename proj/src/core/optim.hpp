#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/tensor.hpp"

namespace addunet {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers mirror the parameter registry
// order, so a (model, optimizer) pair round-trips through checkpoints.
class Adam {
public:
    Adam(const std::vector<std::pair<std::string, Tensor>>& params, AdamConfig config = {});

    // Updates parameters in place from their grad buffers.
    // Throws UsageError naming the first parameter with no gradient.
    void step(std::vector<std::pair<std::string, Tensor>>& params);

    static void zero_grad(std::vector<std::pair<std::string, Tensor>>& params);

    const AdamConfig& config() const { return config_; }
    std::int64_t step_count() const { return step_count_; }

    // checkpoint access
    std::vector<std::vector<double>>& moment1() { return m_; }
    std::vector<std::vector<double>>& moment2() { return v_; }
    void set_step_count(std::int64_t n) { step_count_ = n; }

private:
    AdamConfig config_;
    std::int64_t step_count_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

} // namespace addunet
