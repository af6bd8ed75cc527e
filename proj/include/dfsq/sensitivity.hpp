#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dfsq/computation.hpp"
#include "dfsq/source_model.hpp"

namespace dfsq {

// A nonnegative weighting of the real line describing how strongly local
// quantization error propagates into the computation. Analytic profiles wrap
// a closed form; tabulated profiles interpolate Monte Carlo knots with a
// monotone piecewise cubic and extrapolate as constants beyond the last knot.
class SensitivityProfile {
public:
    struct Knot {
        double x = 0.0;
        double gamma = 0.0;
        double stderr_gamma = 0.0;
    };

    double operator()(double x) const;

    bool is_tabulated() const;
    std::span<const Knot> knots() const;
    // Known zeros of the profile; quadratures split panels there.
    const std::vector<double>& zeros() const;
    const std::string& name() const;

    // Writes (x, gamma) rows; header comments record provenance (sample
    // count and seed for tabulated profiles).
    void save_csv(const std::string& path) const;

    static SensitivityProfile analytic(std::string name,
                                       std::function<double(double)> eval,
                                       std::vector<double> zeros = {});
    static SensitivityProfile from_table(std::string name,
                                         std::vector<Knot> knots,
                                         std::size_t samples_per_point = 0,
                                         std::uint64_t seed = 0);

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// γ(x) = |g'(x)| for univariate g.
SensitivityProfile univariate_sensitivity(const Computation& g);

// γ_n(x) = sqrt(E[|g_n(X)|² | X_n = x]) estimated on a grid: at each knot the
// other coordinates are drawn from their marginals (product source), the
// squared partial is averaged and square-rooted. Standard errors recorded per
// knot. Draws hitting the declared non-smooth set are resampled (measure
// zero). Substreams are keyed by knot index, so results do not depend on
// evaluation order.
SensitivityProfile multivariate_sensitivity_mc(const Computation& g,
                                               const ProductSource& src, int n,
                                               std::span<const double> grid,
                                               std::size_t samples_per_point,
                                               std::uint64_t seed);

// Closed form for min over iid exponentials: the conditional probability that
// coordinate n attains the minimum is e^{-rate·x·(N-1)}, square-rooted.
SensitivityProfile min_exponential_sensitivity(int n_sources, double rate);

// Weighted multi-output variant: sqrt(Σ_m β_m E[|g_n^{(m)}|² | X_n = x]).
SensitivityProfile weighted_sensitivity(const Computation& g,
                                        const ProductSource& src, int n,
                                        std::span<const double> weights,
                                        std::span<const double> grid,
                                        std::size_t samples_per_point,
                                        std::uint64_t seed);

// Default estimation grid: `count` knots at marginal quantile levels
// (j+0.5)/count, extended one knot into each tail (at 1/8 of the extreme
// level). Resolution follows probability mass, which is where cells will be.
std::vector<double> quantile_grid(const SourceModel& marginal, int count = 257);

} // namespace dfsq
