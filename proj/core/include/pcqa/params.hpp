#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pcqa/graph.hpp"
#include "pcqa/rng.hpp"
#include "pcqa/tensor.hpp"

namespace pcqa {

enum class Init { zeros, fan_in_uniform };

// Named trainable leaves. Creation order is preserved so checkpoints and
// optimizer sweeps are deterministic; initial values depend only on
// (seed, name), never on creation order.
template <typename T>
class ParamStore {
public:
    explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

    Var<T> create(const std::string& name, std::vector<int> shape, Init init) {
        if (index_.count(name)) throw std::logic_error("parameter already exists: " + name);
        Tensor<T> t(std::move(shape));
        if (init == Init::fan_in_uniform) {
            // Fan-in scaled uniform: conv {OC,C,k,k} -> C*k*k, linear {m,n} -> n.
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < t.shape.size(); ++i)
                fan_in *= static_cast<std::size_t>(t.shape[i]);
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            Rng rng(mix_seed({seed_, fnv1a_str(name)}));
            for (auto& x : t.v) x = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
        }
        Var<T> p = leaf(std::move(t), true);
        index_.emplace(name, entries_.size());
        entries_.emplace_back(name, p);
        return p;
    }

    Var<T> at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("no such parameter: " + name);
        return entries_[it->second].second;
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    void zero_grad() {
        for (auto& [name, p] : entries_) {
            p->ensure_grad();
            std::fill(p->grad.v.begin(), p->grad.v.end(), T(0));
        }
    }

    const std::vector<std::pair<std::string, Var<T>>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::size_t value_count() const {
        std::size_t n = 0;
        for (const auto& [name, p] : entries_) n += p->val.numel();
        return n;
    }

private:
    std::uint64_t seed_;
    std::vector<std::pair<std::string, Var<T>>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace pcqa
