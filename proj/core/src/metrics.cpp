#include "pcqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcqa {

namespace {

void require_paired(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_len) {
    if (x.size() != y.size()) throw std::invalid_argument("metric inputs must have equal length");
    if (x.size() < min_len)
        throw std::invalid_argument("metric inputs need at least " + std::to_string(min_len) + " points");
}

double mean(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double logistic4(const std::array<double, 4>& beta, double s) {
    return (beta[0] - beta[1]) / (1.0 + std::exp(-(s - beta[2]) / beta[3])) + beta[1];
}

} // namespace

std::vector<double> fractional_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0; // mean of positions i..j, 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    require_paired(x, y, 2);
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::invalid_argument("pearson: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

double srcc(const std::vector<double>& x, const std::vector<double>& y) {
    require_paired(x, y, 2);
    return pearson(fractional_ranks(x), fractional_ranks(y));
}

double krcc(const std::vector<double>& x, const std::vector<double>& y) {
    require_paired(x, y, 2);
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue; // tied in both: excluded everywhere
            if (dx == 0.0) ++ties_x;
            else if (dy == 0.0) ++ties_y;
            else if (dx * dy > 0.0) ++concordant;
            else ++discordant;
        }
    }
    const double cd = static_cast<double>(concordant + discordant);
    const double denom = std::sqrt((cd + static_cast<double>(ties_x)) * (cd + static_cast<double>(ties_y)));
    if (denom <= 0.0) throw std::invalid_argument("krcc: no untied pairs");
    return static_cast<double>(concordant - discordant) / denom;
}

namespace {

double logistic_sigmoid(double u) {
    if (u > 40.0) return 1.0;
    if (u < -40.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-u));
}

} // namespace

LogisticFit logistic_fit(const std::vector<double>& pred, const std::vector<double>& target) {
    require_paired(pred, target, 5);
    const double tmin = *std::min_element(target.begin(), target.end());
    const double tmax = *std::max_element(target.begin(), target.end());
    if (tmin == tmax) throw std::invalid_argument("logistic_fit: constant target");

    const std::size_t n = pred.size();

    // The curve is linear in (b1, b2): f = a*g(u) + b with a = b1 - b2,
    // b = b2. For fixed (b3, b4) the optimal (a, b) solve a 2x2 normal
    // system (variable projection), so Levenberg-Marquardt only has to damp
    // the two nonlinear parameters.
    double b3 = median(pred);
    double b4 = std::max(stddev(pred), 1e-6);
    double a_lin = 0.0, b_lin = 0.0;

    auto project_linear = [&](double c3, double c4, double& a_out, double& b_out) {
        double sgg = 0, sg = 0, sgy = 0, sy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = logistic_sigmoid((pred[i] - c3) / c4);
            sgg += g * g;
            sg += g;
            sgy += g * target[i];
            sy += target[i];
        }
        const double nn = static_cast<double>(n);
        const double det = sgg * nn - sg * sg;
        if (std::abs(det) < 1e-300) {
            a_out = 0.0;
            b_out = sy / nn;
            return;
        }
        a_out = (sgy * nn - sg * sy) / det;
        b_out = (sgg * sy - sg * sgy) / det;
    };

    auto cost_at = [&](double c3, double c4) {
        double a, b;
        project_linear(c3, c4, a, b);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = logistic_sigmoid((pred[i] - c3) / c4);
            const double r = a * g + b - target[i];
            s += r * r;
        }
        return s;
    };

    // Damped least squares behaves poorly along this problem's degenerate
    // direction (near-linear data wants b4 -> inf with a ∝ b4), so minimize
    // the projected cost over (b3, ln b4) with Nelder-Mead instead. Two
    // smooth dimensions; the simplex handles the flat valley fine.
    struct Vertex {
        double x, y, cost;
    };
    auto eval = [&](double x, double y) { return cost_at(x, std::exp(y)); };

    const double spread = *std::max_element(pred.begin(), pred.end()) -
                          *std::min_element(pred.begin(), pred.end());
    std::array<Vertex, 3> simplex;
    simplex[0] = {b3, std::log(b4), 0.0};
    simplex[1] = {b3 + std::max(0.25 * spread, 1e-3), std::log(b4), 0.0};
    simplex[2] = {b3, std::log(b4) + 1.0, 0.0};
    for (auto& v : simplex) v.cost = eval(v.x, v.y);

    bool converged = false;
    for (int iter = 0; iter < 600 && !converged; ++iter) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.cost < b.cost; });
        const Vertex& best_v = simplex[0];
        Vertex& worst_v = simplex[2];
        if (best_v.cost < 1e-26) {
            converged = true;
            break;
        }
        const double diam = std::abs(simplex[0].x - simplex[2].x) + std::abs(simplex[0].y - simplex[2].y) +
                            std::abs(simplex[1].x - simplex[2].x) + std::abs(simplex[1].y - simplex[2].y);
        if (diam < 1e-10 * (1.0 + std::abs(best_v.x) + std::abs(best_v.y))) {
            converged = true;
            break;
        }

        const double cx = 0.5 * (simplex[0].x + simplex[1].x);
        const double cy = 0.5 * (simplex[0].y + simplex[1].y);
        Vertex refl{cx + (cx - worst_v.x), cy + (cy - worst_v.y), 0.0};
        refl.cost = eval(refl.x, refl.y);
        if (refl.cost < best_v.cost) {
            Vertex expd{cx + 2.0 * (cx - worst_v.x), cy + 2.0 * (cy - worst_v.y), 0.0};
            expd.cost = eval(expd.x, expd.y);
            worst_v = expd.cost < refl.cost ? expd : refl;
        } else if (refl.cost < simplex[1].cost) {
            worst_v = refl;
        } else {
            Vertex contr{cx + 0.5 * (worst_v.x - cx), cy + 0.5 * (worst_v.y - cy), 0.0};
            contr.cost = eval(contr.x, contr.y);
            if (contr.cost < worst_v.cost) {
                worst_v = contr;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[static_cast<std::size_t>(i)].x =
                        simplex[0].x + 0.5 * (simplex[static_cast<std::size_t>(i)].x - simplex[0].x);
                    simplex[static_cast<std::size_t>(i)].y =
                        simplex[0].y + 0.5 * (simplex[static_cast<std::size_t>(i)].y - simplex[0].y);
                    simplex[static_cast<std::size_t>(i)].cost =
                        eval(simplex[static_cast<std::size_t>(i)].x, simplex[static_cast<std::size_t>(i)].y);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.cost < b.cost; });
    b3 = simplex[0].x;
    b4 = std::exp(simplex[0].y);
    project_linear(b3, b4, a_lin, b_lin);

    std::array<double, 4> beta = {a_lin + b_lin, b_lin, b3, b4};
    // Canonical orientation: (b1,b2,b3,b4) and (b2,b1,b3,-b4) describe the
    // same curve; report the one with positive slope parameter.
    if (beta[3] < 0.0) {
        std::swap(beta[0], beta[1]);
        beta[3] = -beta[3];
    }

    LogisticFit fit;
    fit.beta = beta;
    fit.converged = converged;
    fit.mapped.reserve(n);
    for (double s : pred) fit.mapped.push_back(logistic4(beta, s));
    return fit;
}

MetricReport report(const std::vector<double>& pred, const std::vector<double>& mos) {
    require_paired(pred, mos, 5);
    MetricReport rep;
    rep.srcc = srcc(pred, mos);
    rep.krcc = krcc(pred, mos);
    const LogisticFit fit = logistic_fit(pred, mos);
    rep.beta = fit.beta;
    rep.fit_converged = fit.converged;
    rep.plcc = pearson(fit.mapped, mos);
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = fit.mapped[i] - mos[i];
        se += d * d;
    }
    rep.rmse = std::sqrt(se / static_cast<double>(pred.size()));
    return rep;
}

} // namespace pcqa
