#pragma once

#include <array>
#include <vector>

namespace pcqa {

// Average (fractional) ranks; ties share the mean of their rank positions.
std::vector<double> fractional_ranks(const std::vector<double>& x);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Spearman: Pearson correlation of fractional ranks.
double srcc(const std::vector<double>& x, const std::vector<double>& y);

// Kendall tau-b: (C - D) / sqrt((C + D + Tx)(C + D + Ty)), where Tx/Ty count
// pairs tied only in x / only in y.
double krcc(const std::vector<double>& x, const std::vector<double>& y);

// Four-parameter logistic f(s) = (b1 - b2) / (1 + exp(-(s - b3)/b4)) + b2,
// fit by damped least squares. Initialization: b1 = max(target),
// b2 = min(target), b3 = median(pred), b4 = std(pred).
struct LogisticFit {
    std::array<double, 4> beta{};
    std::vector<double> mapped; // f(pred)
    bool converged = false;
};

LogisticFit logistic_fit(const std::vector<double>& pred, const std::vector<double>& target);

struct MetricReport {
    double srcc = 0.0;
    double plcc = 0.0;
    double krcc = 0.0;
    double rmse = 0.0;
    std::array<double, 4> beta{};
    bool fit_converged = false;
};

// Rank metrics on raw predictions; PLCC/RMSE after logistic range alignment.
MetricReport report(const std::vector<double>& pred, const std::vector<double>& mos);

} // namespace pcqa
