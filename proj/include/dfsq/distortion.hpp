#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dfsq/computation.hpp"
#include "dfsq/point_density.hpp"
#include "dfsq/quantizer.hpp"
#include "dfsq/sensitivity.hpp"
#include "dfsq/source_model.hpp"

namespace dfsq {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

// D(R) ≈ constant · 2^{-2R}, rate in bits.
struct RateCurve {
    double constant = 0.0;
    double at(double rate_bits) const {
        return constant * std::exp2(-2.0 * rate_bits);
    }
};

// D(κ) ≈ constant / κ² for a total allocation κ = Σ K_n.
struct KappaCurve {
    double constant = 0.0;
    double at(double kappa) const { return constant / (kappa * kappa); }
};

// lim K² D_fmse = (1/12) E[(γ(X)/λ(X))²]. The expectation is integrated over
// the intersection of the source and design supports (the granular-term
// prediction); adaptive panels split at the source median and γ zeros, where
// 1/λ² has integrable singularities. Throws theory_undefined when the
// integral diverges: the smoothness/tail conditions fail for this triple.
double theory_univariate_limit(const SourceModel& src,
                               const SensitivityProfile& gamma,
                               const PointDensity& density);

// (1/12)·‖γ² f‖_{1/3} · 2^{-2R}: fixed-rate distortion under the optimal
// companding design.
RateCurve theory_fixed_rate_optimal(const SourceModel& src,
                                    const SensitivityProfile& gamma);

// (1/12)·2^{2h(X) + 2E[log₂ γ(X)]} · 2^{-2R}: entropy-constrained optimum.
RateCurve theory_entropy_constrained_optimal(const SourceModel& src,
                                             const SensitivityProfile& gamma);

// Distortion-vs-index-entropy constant of an arbitrary design:
// (1/12)·E[(γ/λ)²]·2^{2h(X) + 2E[log₂ λ(X)]}. Minimized by λ ∝ γ, where it
// reduces to the entropy-constrained optimum above.
double theory_ec_constant_for_design(const SourceModel& src,
                                     const SensitivityProfile& gamma,
                                     const PointDensity& density);

// Monte Carlo fMSE of the simple decoder: g applied directly to the decoded
// codewords, E[|g(X_1^N) - g(Q(X_1^N))|²]. One quantizer per source.
// Sampling uses fixed-size blocks with substreams keyed by block index and a
// fixed-order reduction, so a given seed is bit-stable and two runs with the
// same seed see identical source realizations (common random numbers across
// designs).
McEstimate empirical_fmse(const ProductSource& srcs, const Computation& g,
                          std::span<const CompandingQuantizer> quantizers,
                          std::size_t samples, std::uint64_t seed);

// Codeword-index entropy -Σ P_k log₂ P_k with cell probabilities from the
// source CDF (exact cell quadrature).
double index_entropy_bits(const SourceModel& src,
                          const CompandingQuantizer& q);
// Same quantity from Monte Carlo counts.
double index_entropy_bits_mc(const SourceModel& src,
                             const CompandingQuantizer& q,
                             std::size_t samples, std::uint64_t seed);

// Tail-condition diagnostic: T(y) = ∫_tail |g(x)-g(y)|² f dx / (∫_tail λ)²
// evaluated at ±y for each grid point. `violated` is set when a numerator
// integral fails to converge (e.g. identity g on a Cauchy source);
// `decreasing` reports whether the finite series decays toward zero.
struct TailDiagnostic {
    std::vector<double> y;
    std::vector<double> t_upper, t_lower;
    bool decreasing = false;
    bool violated = false;
};
TailDiagnostic check_tail_condition(const SourceModel& src,
                                    const Computation& g,
                                    const PointDensity& density,
                                    std::span<const double> y_grid);

struct RateAllocation {
    double total_bits = 0.0;
    std::vector<double> per_source_bits;
    std::vector<double> alphas; // fractions of the total codebook budget
    double kappa = 0.0;         // Σ 2^{R_n}
};

// Minimizes Σ a_n 2^{-2 R_n} subject to Σ R_n = R, R_n >= 0. Negative
// water-filling solutions are clipped to zero with an active-set re-solve.
RateAllocation allocate_rates(std::span<const double> constants,
                              double total_bits);

// lim κ² D = Σ_n (1/(12 α_n²)) E[(γ_n/λ_n)²] for a fractional allocation.
KappaCurve theory_multivariate_limit(const ProductSource& srcs,
                                     std::span<const SensitivityProfile> gammas,
                                     std::span<const PointDensity> densities,
                                     const RateAllocation& alloc);

// Weighted-fMSE variant: identical once the profiles are the weighted ones.
KappaCurve weighted_fmse_theory(const ProductSource& srcs,
                                std::span<const SensitivityProfile> weighted_gammas,
                                std::span<const PointDensity> densities,
                                const RateAllocation& alloc);

RateAllocation equal_allocation(int n_sources, double per_source_bits);

} // namespace dfsq
