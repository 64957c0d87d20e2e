#pragma once

#include <cmath>
#include <vector>

#include "homogcl/matrix.hpp"

namespace homogcl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 penalty folded into the gradient
};

struct AdamState {
    std::vector<DenseMatrix> m;
    std::vector<DenseMatrix> v;
    std::size_t step = 0;
};

// Standard bias-corrected Adam update, in place.
inline void adam_step(std::vector<DenseMatrix>& params, const std::vector<DenseMatrix>& grads,
                      AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size()) fail<DataError>("adam_step: param/grad count mismatch");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.rows(), p.cols());
            state.v.emplace_back(p.rows(), p.cols());
        }
    }
    if (state.m.size() != params.size()) fail<DataError>("adam_step: state size mismatch");
    state.step++;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t p = 0; p < params.size(); ++p) {
        require_same_shape(params[p], grads[p], "adam_step");
        require_same_shape(params[p], state.m[p], "adam_step");
        auto& w = params[p].data();
        const auto& g = grads[p].data();
        auto& m = state.m[p].data();
        auto& v = state.v[p].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g[i] + cfg.weight_decay * w[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace homogcl
