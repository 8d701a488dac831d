#pragma once

#include <cmath>
#include <vector>

#include "hyperconv/errors.hpp"
#include "hyperconv/tensor.hpp"

namespace hyperconv {

struct AdamConfig {
    double lr = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam with L2 regularization folded into the gradient as
// g' = g + 2*lambda*theta (per-parameter lambda).
class AdamState {
public:
    AdamState(const std::vector<Tensor>& params, AdamConfig cfg = {}) : cfg_(cfg) {
        for (const Tensor& p : params) {
            m_.emplace_back(p.rows(), p.cols());
            v_.emplace_back(p.rows(), p.cols());
        }
    }

    const AdamConfig& config() const { return cfg_; }
    long step_count() const { return step_; }

    void step(std::vector<Tensor>& params, const std::vector<double>& weight_decay) {
        if (params.size() != m_.size() || weight_decay.size() != m_.size())
            throw DimensionMismatch("adam_step: parameter count changed");
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            DenseMatrix& theta = params[p].value();
            const DenseMatrix& grad = params[p].grad();
            if (!theta.same_shape(m_[p])) throw DimensionMismatch("adam_step: shape mismatch");
            const double lam2 = 2.0 * weight_decay[p];
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double g = grad.data()[i] + lam2 * theta.data()[i];
                double& m = m_[p].data()[i];
                double& v = v_[p].data()[i];
                m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
                v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
                theta.data()[i] -= cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
            }
        }
    }

private:
    AdamConfig cfg_;
    std::vector<DenseMatrix> m_, v_;
    long step_ = 0;
};

}  // namespace hyperconv
