#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "pcqa/params.hpp"

namespace pcqa {

// Adaptive-moment optimizer with bias correction. Moments live here, keyed
// by parameter name, so checkpoints can carry them.
template <typename T>
class Adam {
public:
    struct Moments {
        Tensor<T> m, v;
    };

    void step(ParamStore<T>& params, double lr, double beta1, double beta2, double eps = 1e-8) {
        if (!(lr > 0.0)) throw std::invalid_argument("adam: lr must be positive");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (auto& [name, p] : params.entries()) {
            if (p->grad.v.empty())
                throw std::logic_error("adam: no gradient recorded for '" + name + "'");
            auto& mo = moments_[name];
            if (mo.m.v.empty()) {
                mo.m = Tensor<T>::zeros(p->val.shape);
                mo.v = Tensor<T>::zeros(p->val.shape);
            }
            for (std::size_t i = 0; i < p->val.numel(); ++i) {
                const double g = static_cast<double>(p->grad.v[i]);
                const double m = beta1 * static_cast<double>(mo.m.v[i]) + (1.0 - beta1) * g;
                const double v = beta2 * static_cast<double>(mo.v.v[i]) + (1.0 - beta2) * g * g;
                mo.m.v[i] = static_cast<T>(m);
                mo.v.v[i] = static_cast<T>(v);
                const double update = lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
                p->val.v[i] = static_cast<T>(static_cast<double>(p->val.v[i]) - update);
            }
        }
    }

    long long step_count() const { return t_; }
    void set_step_count(long long t) { t_ = t; }

    std::unordered_map<std::string, Moments>& moments() { return moments_; }
    const std::unordered_map<std::string, Moments>& moments() const { return moments_; }

private:
    long long t_ = 0;
    std::unordered_map<std::string, Moments> moments_;
};

} // namespace pcqa
