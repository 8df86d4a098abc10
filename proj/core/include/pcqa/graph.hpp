#pragma once

// Reverse-mode autodiff over a small, closed op set: conv2d, linear,
// spatial averaging, elementwise add/mul/exp/clamp/abs, channel concat,
// non-overlapping average pooling and constant spatial tiling, plus the
// slicing/reduction glue the loss terms need. Graphs are recorded by value
// (shared_ptr DAG) and freed when the loss node goes out of scope; parameter
// leaves persist across steps and accumulate gradients additively until the
// trainer zeroes them.

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pcqa/tensor.hpp"

namespace pcqa {

enum class Activation { none, relu };

template <typename T>
struct Node {
    Tensor<T> val;
    Tensor<T> grad; // allocated lazily; persistent on parameter leaves
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void(Node<T>&)> backprop; // pulls this->grad into parents

    void ensure_grad() {
        if (grad.v.empty()) grad = Tensor<T>::zeros(val.shape);
    }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

// Gradient storage stays empty until a backward pass (or zero_grad) touches
// it, so an optimizer step without any recorded gradients is detectable.
template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->val = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

template <typename T>
Var<T> constant(Tensor<T> value) {
    return leaf(std::move(value), false);
}

namespace detail {

template <typename T, typename F>
Var<T> make_node(Tensor<T> val, const char* op, std::vector<Var<T>> parents, F&& backprop) {
    check_finite(val, op);
    auto n = std::make_shared<Node<T>>();
    n->val = std::move(val);
    n->op = op;
    for (const auto& p : parents) n->requires_grad |= p->requires_grad;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backprop = std::forward<F>(backprop);
    }
    return n;
}

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

inline int conv_out_size(int in, int k, int stride, int pad) {
    const int span = in + 2 * pad - k;
    if (span < 0 || stride < 1) throw ShapeError("conv2d: kernel does not fit input");
    return span / stride + 1;
}

// Unfold CHW input into a (C*k*k) x (OH*OW) patch matrix (row-major).
template <typename T>
MatRM<T> im2col(const Tensor<T>& x, int k, int stride, int pad, int oh, int ow) {
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
    MatRM<T> cols(C * k * k, oh * ow);
    for (int c = 0; c < C; ++c) {
        const T* plane = x.data() + static_cast<std::size_t>(c) * H * W;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* row = cols.row((c * k + ky) * k + kx).data();
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    T* dst = row + oy * ow;
                    if (iy < 0 || iy >= H) {
                        std::fill(dst, dst + ow, T(0));
                        continue;
                    }
                    const T* src = plane + static_cast<std::size_t>(iy) * W;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        dst[ox] = (ix >= 0 && ix < W) ? src[ix] : T(0);
                    }
                }
            }
        }
    }
    return cols;
}

// Scatter-add of a patch-matrix gradient back onto the input layout.
template <typename T>
void col2im_add(const MatRM<T>& cols, Tensor<T>& gx, int k, int stride, int pad, int oh, int ow) {
    const int C = gx.dim(0), H = gx.dim(1), W = gx.dim(2);
    for (int c = 0; c < C; ++c) {
        T* plane = gx.data() + static_cast<std::size_t>(c) * H * W;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const T* row = cols.row((c * k + ky) * k + kx).data();
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= H) continue;
                    T* dst = plane + static_cast<std::size_t>(iy) * W;
                    const T* src = row + oy * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < W) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

} // namespace detail

// Cross-correlation + bias with optional fused rectification.
// x: {C,H,W}, w: {OC,C,k,k}, b: {OC}.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad,
              Activation act = Activation::none) {
    if (x->val.rank() != 3 || w->val.rank() != 4) throw ShapeError("conv2d: expected CHW input and OIKK weights");
    const int C = x->val.dim(0), H = x->val.dim(1), W = x->val.dim(2);
    const int OC = w->val.dim(0), k = w->val.dim(2);
    if (w->val.dim(1) != C) throw ShapeError("conv2d: channel mismatch");
    if (w->val.dim(3) != k) throw ShapeError("conv2d: non-square kernel");
    if (b->val.numel() != static_cast<std::size_t>(OC)) throw ShapeError("conv2d: bias size mismatch");
    const int OH = detail::conv_out_size(H, k, stride, pad);
    const int OW = detail::conv_out_size(W, k, stride, pad);

    Tensor<T> out({OC, OH, OW});
    {
        detail::MatRM<T> cols = detail::im2col(x->val, k, stride, pad, OH, OW);
        detail::CMapRM<T> wm(w->val.data(), OC, C * k * k);
        detail::MapRM<T> om(out.data(), OC, OH * OW);
        om.noalias() = wm * cols;
        for (int oc = 0; oc < OC; ++oc) om.row(oc).array() += b->val.v[static_cast<std::size_t>(oc)];
        if (act == Activation::relu) om = om.cwiseMax(T(0));
    }

    auto backprop = [stride, pad, k, act](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        const Var<T>& wi = n.parents[1];
        const Var<T>& bi = n.parents[2];
        const int OC = n.val.dim(0), OH = n.val.dim(1), OW = n.val.dim(2);
        const int C = xi->val.dim(0);

        detail::MatRM<T> go = detail::CMapRM<T>(n.grad.data(), OC, OH * OW);
        if (act == Activation::relu) {
            detail::CMapRM<T> vm(n.val.data(), OC, OH * OW);
            go = go.cwiseProduct((vm.array() > T(0)).template cast<T>().matrix());
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            for (int oc = 0; oc < OC; ++oc) bi->grad.v[static_cast<std::size_t>(oc)] += go.row(oc).sum();
        }
        if (wi->requires_grad || xi->requires_grad) {
            if (wi->requires_grad) {
                wi->ensure_grad();
                detail::MatRM<T> cols = detail::im2col(xi->val, k, stride, pad, OH, OW);
                detail::MapRM<T> gw(wi->grad.data(), OC, C * k * k);
                gw.noalias() += go * cols.transpose();
            }
            if (xi->requires_grad) {
                xi->ensure_grad();
                detail::CMapRM<T> wm(wi->val.data(), OC, C * k * k);
                detail::MatRM<T> gcols = wm.transpose() * go;
                detail::col2im_add(gcols, xi->grad, k, stride, pad, OH, OW);
            }
        }
    };
    return detail::make_node(std::move(out), "conv2d", {x, w, b}, backprop);
}

// Affine map. x: {n}, w: {m,n}, b: {m}.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
    if (w->val.rank() != 2) throw ShapeError("linear: weight must be rank 2");
    const int m = w->val.dim(0), n = w->val.dim(1);
    if (x->val.numel() != static_cast<std::size_t>(n)) throw ShapeError("linear: input length mismatch");
    if (b->val.numel() != static_cast<std::size_t>(m)) throw ShapeError("linear: bias length mismatch");

    Tensor<T> out({m});
    {
        detail::CMapRM<T> wm(w->val.data(), m, n);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv(x->val.data(), n);
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> ov(out.data(), m);
        ov.noalias() = wm * xv;
        for (int i = 0; i < m; ++i) out.v[static_cast<std::size_t>(i)] += b->val.v[static_cast<std::size_t>(i)];
    }
    auto backprop = [m, n](Node<T>& nd) {
        const Var<T>& xi = nd.parents[0];
        const Var<T>& wi = nd.parents[1];
        const Var<T>& bi = nd.parents[2];
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> g(nd.grad.data(), m);
        if (bi->requires_grad) {
            bi->ensure_grad();
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(bi->grad.data(), m) += g;
        }
        if (wi->requires_grad) {
            wi->ensure_grad();
            Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> xv(xi->val.data(), n);
            detail::MapRM<T>(wi->grad.data(), m, n).noalias() += g * xv.transpose();
        }
        if (xi->requires_grad) {
            xi->ensure_grad();
            detail::CMapRM<T> wm(wi->val.data(), m, n);
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(xi->grad.data(), n).noalias() += wm.transpose() * g;
        }
    };
    return detail::make_node(std::move(out), "linear", {x, w, b}, backprop);
}

template <typename T>
Var<T> relu(const Var<T>& x) {
    Tensor<T> out = x->val;
    for (auto& e : out.v) e = std::max(e, T(0));
    auto backprop = [](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (std::size_t i = 0; i < n.val.numel(); ++i)
            if (n.val.v[i] > T(0)) xi->grad.v[i] += n.grad.v[i];
    };
    return detail::make_node(std::move(out), "relu", {x}, backprop);
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    if (!a->val.same_shape(b->val)) throw ShapeError("add: shape mismatch");
    Tensor<T> out = a->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out.v[i] += b->val.v[i];
    auto backprop = [](Node<T>& n) {
        for (const auto& p : n.parents) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) p->grad.v[i] += n.grad.v[i];
        }
    };
    return detail::make_node(std::move(out), "add", {a, b}, backprop);
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    if (!a->val.same_shape(b->val)) throw ShapeError("sub: shape mismatch");
    Tensor<T> out = a->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out.v[i] -= b->val.v[i];
    auto backprop = [](Node<T>& n) {
        const Var<T>& ai = n.parents[0];
        const Var<T>& bi = n.parents[1];
        if (ai->requires_grad) {
            ai->ensure_grad();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) ai->grad.v[i] += n.grad.v[i];
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) bi->grad.v[i] -= n.grad.v[i];
        }
    };
    return detail::make_node(std::move(out), "sub", {a, b}, backprop);
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    if (!a->val.same_shape(b->val)) throw ShapeError("mul: shape mismatch");
    Tensor<T> out = a->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out.v[i] *= b->val.v[i];
    auto backprop = [](Node<T>& n) {
        const Var<T>& ai = n.parents[0];
        const Var<T>& bi = n.parents[1];
        if (ai->requires_grad) {
            ai->ensure_grad();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) ai->grad.v[i] += n.grad.v[i] * bi->val.v[i];
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) bi->grad.v[i] += n.grad.v[i] * ai->val.v[i];
        }
    };
    return detail::make_node(std::move(out), "mul", {a, b}, backprop);
}

// Elementwise sum of k same-shape inputs (the cross-view aggregator). Each
// element is accumulated in ascending value order, which makes the result a
// function of the value multiset alone: permuting the inputs changes nothing,
// bit for bit.
template <typename T>
Var<T> add_n(const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw ShapeError("add_n: empty input list");
    for (const auto& x : xs)
        if (!x->val.same_shape(xs[0]->val)) throw ShapeError("add_n: shape mismatch");

    Tensor<T> out(xs[0]->val.shape);
    const std::size_t k = xs.size();
    std::vector<T> terms(k);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        for (std::size_t j = 0; j < k; ++j) terms[j] = xs[j]->val.v[i];
        std::sort(terms.begin(), terms.end());
        T acc = 0;
        for (const T& t : terms) acc += t;
        out.v[i] = acc;
    }
    auto backprop = [](Node<T>& n) {
        for (const auto& p : n.parents) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) p->grad.v[i] += n.grad.v[i];
        }
    };
    return detail::make_node(std::move(out), "add_n", xs, backprop);
}

template <typename T>
Var<T> scale(const Var<T>& x, T c) {
    Tensor<T> out = x->val;
    for (auto& e : out.v) e *= c;
    auto backprop = [c](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) xi->grad.v[i] += c * n.grad.v[i];
    };
    return detail::make_node(std::move(out), "scale", {x}, backprop);
}

template <typename T>
Var<T> add_const(const Var<T>& x, T c) {
    Tensor<T> out = x->val;
    for (auto& e : out.v) e += c;
    auto backprop = [](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) xi->grad.v[i] += n.grad.v[i];
    };
    return detail::make_node(std::move(out), "add_const", {x}, backprop);
}

template <typename T>
Var<T> vexp(const Var<T>& x) {
    Tensor<T> out = x->val;
    for (auto& e : out.v) e = std::exp(e);
    auto backprop = [](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) xi->grad.v[i] += n.grad.v[i] * n.val.v[i];
    };
    return detail::make_node(std::move(out), "exp", {x}, backprop);
}

// Gradient convention: sign(x) with subgradient 0 at x == 0.
template <typename T>
Var<T> vabs(const Var<T>& x) {
    Tensor<T> out = x->val;
    for (auto& e : out.v) e = std::abs(e);
    auto backprop = [](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            const T xv = xi->val.v[i];
            if (xv > T(0)) xi->grad.v[i] += n.grad.v[i];
            else if (xv < T(0)) xi->grad.v[i] -= n.grad.v[i];
        }
    };
    return detail::make_node(std::move(out), "abs", {x}, backprop);
}

// Gradient passes only strictly inside (lo, hi).
template <typename T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
    if (!(lo <= hi)) throw ShapeError("clamp: lo > hi");
    Tensor<T> out = x->val;
    for (auto& e : out.v) e = std::min(std::max(e, lo), hi);
    auto backprop = [lo, hi](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            const T xv = xi->val.v[i];
            if (xv > lo && xv < hi) xi->grad.v[i] += n.grad.v[i];
        }
    };
    return detail::make_node(std::move(out), "clamp", {x}, backprop);
}

// Concatenate CHW maps along the channel axis; spatial sizes must agree.
template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw ShapeError("concat_channels: empty input list");
    const int H = xs[0]->val.dim(1), W = xs[0]->val.dim(2);
    int C = 0;
    for (const auto& x : xs) {
        if (x->val.rank() != 3 || x->val.dim(1) != H || x->val.dim(2) != W)
            throw ShapeError("concat_channels: spatial size mismatch");
        C += x->val.dim(0);
    }
    Tensor<T> out({C, H, W});
    std::size_t off = 0;
    for (const auto& x : xs) {
        std::copy(x->val.v.begin(), x->val.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(off));
        off += x->val.numel();
    }
    auto backprop = [](Node<T>& n) {
        std::size_t off = 0;
        for (const auto& p : n.parents) {
            const std::size_t cnt = p->val.numel();
            if (p->requires_grad) {
                p->ensure_grad();
                for (std::size_t i = 0; i < cnt; ++i) p->grad.v[i] += n.grad.v[off + i];
            }
            off += cnt;
        }
    };
    return detail::make_node(std::move(out), "concat_channels", xs, backprop);
}

// Non-overlapping average pooling by an integer factor.
template <typename T>
Var<T> avg_pool(const Var<T>& x, int factor) {
    if (x->val.rank() != 3) throw ShapeError("avg_pool: expected CHW input");
    if (factor < 1) throw ShapeError("avg_pool: factor must be >= 1");
    const int C = x->val.dim(0), H = x->val.dim(1), W = x->val.dim(2);
    if (H % factor != 0 || W % factor != 0) throw ShapeError("avg_pool: non-integer pooling factor");
    const int OH = H / factor, OW = W / factor;
    Tensor<T> out({C, OH, OW});
    const T inv = T(1) / static_cast<T>(factor * factor);
    for (int c = 0; c < C; ++c) {
        const T* plane = x->val.data() + static_cast<std::size_t>(c) * H * W;
        T* oplane = out.data() + static_cast<std::size_t>(c) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                T s = 0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        s += plane[(oy * factor + dy) * W + (ox * factor + dx)];
                oplane[oy * OW + ox] = s * inv;
            }
        }
    }
    auto backprop = [factor](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        const int C = xi->val.dim(0), H = xi->val.dim(1), W = xi->val.dim(2);
        const int OH = H / factor, OW = W / factor;
        const T inv = T(1) / static_cast<T>(factor * factor);
        for (int c = 0; c < C; ++c) {
            T* gplane = xi->grad.data() + static_cast<std::size_t>(c) * H * W;
            const T* goplane = n.grad.data() + static_cast<std::size_t>(c) * OH * OW;
            for (int oy = 0; oy < OH; ++oy)
                for (int ox = 0; ox < OW; ++ox) {
                    const T g = goplane[oy * OW + ox] * inv;
                    for (int dy = 0; dy < factor; ++dy)
                        for (int dx = 0; dx < factor; ++dx)
                            gplane[(oy * factor + dy) * W + (ox * factor + dx)] += g;
                }
        }
    };
    return detail::make_node(std::move(out), "avg_pool", {x}, backprop);
}

// Per-channel mean over all spatial positions: {C,H,W} -> {C}.
template <typename T>
Var<T> spatial_avg(const Var<T>& x) {
    if (x->val.rank() != 3) throw ShapeError("spatial_avg: expected CHW input");
    const int C = x->val.dim(0), H = x->val.dim(1), W = x->val.dim(2);
    if (H < 1 || W < 1) throw ShapeError("spatial_avg: empty plane");
    Tensor<T> out({C});
    const T inv = T(1) / static_cast<T>(H * W);
    for (int c = 0; c < C; ++c) {
        const T* plane = x->val.data() + static_cast<std::size_t>(c) * H * W;
        T s = 0;
        for (int i = 0; i < H * W; ++i) s += plane[i];
        out.v[static_cast<std::size_t>(c)] = s * inv;
    }
    auto backprop = [](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        const int C = xi->val.dim(0), H = xi->val.dim(1), W = xi->val.dim(2);
        const T inv = T(1) / static_cast<T>(H * W);
        for (int c = 0; c < C; ++c) {
            const T g = n.grad.v[static_cast<std::size_t>(c)] * inv;
            T* gplane = xi->grad.data() + static_cast<std::size_t>(c) * H * W;
            for (int i = 0; i < H * W; ++i) gplane[i] += g;
        }
    };
    return detail::make_node(std::move(out), "spatial_avg", {x}, backprop);
}

// Tile a length-C vector into a {C,h,w} map, each channel spatially constant.
template <typename T>
Var<T> tile_spatial(const Var<T>& z, int h, int w) {
    if (h < 1 || w < 1) throw ShapeError("tile_spatial: invalid target size");
    const int C = static_cast<int>(z->val.numel());
    Tensor<T> out({C, h, w});
    for (int c = 0; c < C; ++c)
        std::fill_n(out.data() + static_cast<std::size_t>(c) * h * w, h * w, z->val.v[static_cast<std::size_t>(c)]);
    auto backprop = [h, w](Node<T>& n) {
        const Var<T>& zi = n.parents[0];
        if (!zi->requires_grad) return;
        zi->ensure_grad();
        const int C = static_cast<int>(zi->val.numel());
        for (int c = 0; c < C; ++c) {
            const T* gplane = n.grad.data() + static_cast<std::size_t>(c) * h * w;
            T s = 0;
            for (int i = 0; i < h * w; ++i) s += gplane[i];
            zi->grad.v[static_cast<std::size_t>(c)] += s;
        }
    };
    return detail::make_node(std::move(out), "tile_spatial", {z}, backprop);
}

// Contiguous sub-vector of a rank-1 var.
template <typename T>
Var<T> slice(const Var<T>& x, int offset, int len) {
    if (x->val.rank() != 1) throw ShapeError("slice: expected rank-1 input");
    if (offset < 0 || len < 0 || static_cast<std::size_t>(offset + len) > x->val.numel())
        throw ShapeError("slice: out of range");
    Tensor<T> out({len});
    std::copy_n(x->val.data() + offset, len, out.data());
    auto backprop = [offset, len](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        for (int i = 0; i < len; ++i)
            xi->grad.v[static_cast<std::size_t>(offset + i)] += n.grad.v[static_cast<std::size_t>(i)];
    };
    return detail::make_node(std::move(out), "slice", {x}, backprop);
}

template <typename T>
Var<T> reduce_sum(const Var<T>& x) {
    T s = 0;
    for (const T& e : x->val.v) s += e;
    Tensor<T> out = Tensor<T>::scalar(s);
    auto backprop = [](Node<T>& n) {
        const Var<T>& xi = n.parents[0];
        if (!xi->requires_grad) return;
        xi->ensure_grad();
        const T g = n.grad.v[0];
        for (auto& e : xi->grad.v) e += g;
    };
    return detail::make_node(std::move(out), "reduce_sum", {x}, backprop);
}

// Reverse-mode sweep from a scalar loss. Gradients accumulate additively into
// every reachable grad buffer; parameter buffers are zeroed externally.
template <typename T>
void backward(const Var<T>& loss) {
    if (!loss) throw std::logic_error("backward: null loss");
    if (loss->val.numel() != 1) throw ShapeError("backward: loss must be scalar");
    if (loss->parents.empty() && !loss->requires_grad)
        throw std::logic_error("backward: loss is not part of a recorded computation");

    // Iterative post-order DFS over grad-requiring ancestors.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    seen.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node<T>* p = node->parents[idx++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss->ensure_grad();
    loss->grad.v[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backprop && !n->grad.v.empty()) n->backprop(*n);
    }
}

} // namespace pcqa
