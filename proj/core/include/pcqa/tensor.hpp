#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcqa {

class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised the moment any operation produces a non-finite value; the trainer
// catches it to report divergence instead of silently propagating NaNs.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw ShapeError("negative dimension");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

// Dense row-major tensor. Feature maps use C x H x W order.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(numel_of(shape), T(0)) {}
    Tensor(std::vector<int> s, std::vector<T> data) : shape(std::move(s)), v(std::move(data)) {
        if (v.size() != numel_of(shape)) throw ShapeError("data size does not match shape");
    }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, T value) {
        Tensor t(std::move(s));
        for (auto& x : t.v) x = value;
        return t;
    }
    static Tensor scalar(T value) { return Tensor({1}, {value}); }

    std::size_t numel() const { return v.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
};

// Cheap full-tensor finiteness gate: a single accumulation turns non-finite
// the moment any element is inf/NaN (double accumulator cannot overflow from
// float inputs at these sizes); only then do we rescan for the exact index.
template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
    double acc = 0.0;
    for (const T& x : t.v) acc += static_cast<double>(x);
    if (std::isfinite(acc)) return;
    for (std::size_t i = 0; i < t.v.size(); ++i) {
        if (!std::isfinite(static_cast<double>(t.v[i]))) {
            throw NonFiniteError(std::string("non-finite value produced by op '") + op +
                                 "' at element " + std::to_string(i));
        }
    }
    // Accumulator overflowed but every element is finite (values ~1e300+);
    // treat as non-finite anyway since downstream math is already saturated.
    throw NonFiniteError(std::string("value overflow detected in op '") + op + "'");
}

} // namespace pcqa
