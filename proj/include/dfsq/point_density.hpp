#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dfsq/interval.hpp"
#include "dfsq/sensitivity.hpp"
#include "dfsq/source_model.hpp"

namespace dfsq {

// A normalized point density λ with its compressor c(x) = ∫_{-∞}^x λ and the
// inverse c⁻¹. The design object: a companding quantizer of any size is read
// off the compressor. Construction normalizes an arbitrary nonnegative shape
// function numerically; unbounded supports are never truncated — only the
// quadrature window is extended until the residual tail mass of λ drops
// below 1e-12.
class PointDensity {
public:
    struct BuildOptions {
        std::vector<double> breakpoints; // kinks/zeros/median of the shape
        double scale_hint = 1.0;         // initial tail panel width
    };

    double lambda(double x) const;
    double compressor(double x) const;
    // Solves c(x) = u to 1e-12 in probability (bisection-guarded Newton).
    double inv_compressor(double u) const;

    Interval support() const;
    double normalization() const; // divisor applied to the unnormalized shape
    const std::string& name() const;

    // Full type-invariant check: unit mass by an independent quadrature
    // route, nondecreasing compressor, round-trip inverse, and strict
    // compressor increase across a quantile grid (no zero-mass subintervals).
    void validate() const;

    void save_csv(const std::string& path, int rows = 257) const;

    static PointDensity uniform(Interval iv);
    static PointDensity from_unnormalized(std::string name,
                                          std::function<double(double)> shape,
                                          Interval support, BuildOptions opts);
    static PointDensity from_unnormalized(std::string name,
                                          std::function<double(double)> shape,
                                          Interval support) {
        return from_unnormalized(std::move(name), std::move(shape), support,
                                 BuildOptions());
    }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// λ ∝ f^{1/3}: the classical fixed-rate MSE-optimal compander.
PointDensity design_mse_fixed_rate(const SourceModel& src);

// λ ∝ (γ² f)^{1/3}: fixed-rate fMSE-optimal.
PointDensity design_fmse_fixed_rate(const SourceModel& src,
                                    const SensitivityProfile& gamma);

// λ ∝ γ on the given support: entropy-constrained fMSE-optimal. Throws
// design_infeasible when γ is not integrable over the support (finite
// codebook restriction).
PointDensity design_fmse_entropy_constrained(const SensitivityProfile& gamma,
                                             Interval support);

PointDensity design_uniform(Interval iv);
PointDensity design_uniform(double halfwidth); // [-w, w]

} // namespace dfsq
