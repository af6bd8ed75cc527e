#include "dfsq/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dfsq/errors.hpp"
#include "dfsq/quadrature.hpp"

namespace dfsq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

quad::Options theory_opts(const SourceModel& src,
                          const SensitivityProfile& gamma) {
    quad::Options opts;
    opts.rel_tol = 1e-9;
    opts.breakpoints.push_back(src.median());
    for (double z : gamma.zeros()) opts.breakpoints.push_back(z);
    const double spread =
        std::abs(src.inv_cdf(0.84) - src.inv_cdf(0.16)) / 2.0;
    opts.tail_scale = std::max(spread, 1e-3);
    return opts;
}

} // namespace

double theory_univariate_limit(const SourceModel& src,
                               const SensitivityProfile& gamma,
                               const PointDensity& density) {
    const Interval range = src.support().intersect(density.support());
    auto integrand = [&](double x) {
        const double f = src.pdf(x);
        if (f <= 0.0) return 0.0;
        const double g = gamma(x);
        const double l = density.lambda(x);
        // λ vanishes only at γ zeros (or in the underflow sliver right next
        // to them, where x² rounds to 0); a genuine divergence shows up from
        // the neighborhood and fails the error estimate, not from the point.
        if (l <= 0.0) return 0.0;
        const double r = g / l;
        return f * r * r;
    };
    auto r = quad::integrate(integrand, range.lo, range.hi,
                             theory_opts(src, gamma));
    if (!r.converged)
        throw theory_undefined(
            "theory_univariate_limit: E[(gamma/lambda)^2] diverges for '" +
            density.name() + "'");
    return r.value / 12.0;
}

RateCurve theory_fixed_rate_optimal(const SourceModel& src,
                                    const SensitivityProfile& gamma) {
    auto integrand = [&](double x) {
        const double g = gamma(x);
        return std::cbrt(g * g * src.pdf(x));
    };
    auto r = quad::integrate(integrand, src.support().lo, src.support().hi,
                             theory_opts(src, gamma));
    if (!r.converged)
        throw theory_undefined(
            "theory_fixed_rate_optimal: ||gamma^2 f||_{1/3} diverges");
    return RateCurve{r.value * r.value * r.value / 12.0};
}

RateCurve theory_entropy_constrained_optimal(const SourceModel& src,
                                             const SensitivityProfile& gamma) {
    const double h_bits = diff_entropy(src).bits();
    auto integrand = [&](double x) {
        const double f = src.pdf(x);
        if (f <= 0.0) return 0.0;
        const double g = gamma(x);
        // Declared γ zeros are panel endpoints, never evaluated; a -inf here
        // means γ underflowed on a region with source mass (divergent E[log γ],
        // e.g. any exponential-decay γ against Cauchy tails).
        if (g <= 0.0) return -kInf;
        return f * std::log2(g);
    };
    auto r = quad::integrate(integrand, src.support().lo, src.support().hi,
                             theory_opts(src, gamma));
    if (!r.converged)
        throw theory_undefined(
            "theory_entropy_constrained_optimal: E[log gamma] diverges");
    return RateCurve{std::exp2(2.0 * (h_bits + r.value)) / 12.0};
}

double theory_ec_constant_for_design(const SourceModel& src,
                                     const SensitivityProfile& gamma,
                                     const PointDensity& density) {
    // E[log λ] is -inf when the design leaves source mass uncovered.
    const Interval ds = density.support();
    const double covered = src.cdf(std::min(ds.hi, src.support().hi)) -
                           src.cdf(std::max(ds.lo, src.support().lo));
    if (covered < 1.0 - 1e-9)
        throw theory_undefined(
            "theory_ec_constant_for_design: design support misses source mass");
    const double limit = theory_univariate_limit(src, gamma, density);
    const double h_bits = diff_entropy(src).bits();
    auto integrand = [&](double x) {
        const double f = src.pdf(x);
        if (f <= 0.0) return 0.0;
        const double l = density.lambda(x);
        if (l <= 0.0) return -kInf;
        return f * std::log2(l);
    };
    auto r = quad::integrate(integrand, src.support().lo, src.support().hi,
                             theory_opts(src, gamma));
    if (!r.converged)
        throw theory_undefined("theory_ec_constant_for_design: E[log lambda] "
                               "diverges (design support misses source mass?)");
    return limit * std::exp2(2.0 * (h_bits + r.value));
}

McEstimate empirical_fmse(const ProductSource& srcs, const Computation& g,
                          std::span<const CompandingQuantizer> quantizers,
                          std::size_t samples, std::uint64_t seed) {
    const int n = srcs.dimension();
    if (g.arity() != n)
        throw invalid_parameter("empirical_fmse: computation arity != sources");
    if (g.output_dim() != 1)
        throw invalid_parameter("empirical_fmse: scalar computations only");
    if (static_cast<int>(quantizers.size()) != n)
        throw invalid_parameter("empirical_fmse: one quantizer per source");
    if (samples < 10000)
        throw invalid_parameter("empirical_fmse: samples must be >= 1e4");

    constexpr std::size_t kBlock = 1 << 16;
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> xq(static_cast<std::size_t>(n));

    double sum = 0.0, sum_sq = 0.0;
    std::size_t done = 0;
    for (std::uint64_t block = 0; done < samples; ++block) {
        RngStream rng = RngStream::substream(seed, block);
        const std::size_t count = std::min(kBlock, samples - done);
        double bsum = 0.0, bsum_sq = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            for (int j = 0; j < n; ++j)
                x[static_cast<std::size_t>(j)] = srcs.marginal(j).sample(rng);
            for (int j = 0; j < n; ++j) {
                const auto& q = quantizers[static_cast<std::size_t>(j)];
                xq[static_cast<std::size_t>(j)] =
                    q.decode(q.encode(x[static_cast<std::size_t>(j)]));
            }
            const double err = g.eval1(xq) - g.eval1(x);
            const double e2 = err * err;
            bsum += e2;
            bsum_sq += e2 * e2;
        }
        sum += bsum;
        sum_sq += bsum_sq;
        done += count;
    }

    McEstimate est;
    est.samples = samples;
    const double nd = static_cast<double>(samples);
    est.mean = sum / nd;
    const double var =
        std::max(0.0, (sum_sq / nd - est.mean * est.mean) * nd / (nd - 1.0));
    est.std_error = std::sqrt(var / nd);
    return est;
}

double index_entropy_bits(const SourceModel& src, const CompandingQuantizer& q) {
    double h = 0.0;
    for (int k = 1; k <= q.size(); ++k) {
        const double lo = std::max(q.cell_lo(k), src.support().lo);
        const double hi = std::min(q.cell_hi(k), src.support().hi);
        if (!(hi > lo)) continue;
        const double p = src.cdf(hi) - src.cdf(lo);
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

double index_entropy_bits_mc(const SourceModel& src, const CompandingQuantizer& q,
                             std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw invalid_parameter("index_entropy: zero samples");
    std::vector<std::size_t> counts(static_cast<std::size_t>(q.size()), 0);
    constexpr std::size_t kBlock = 1 << 16;
    std::size_t done = 0;
    for (std::uint64_t block = 0; done < samples; ++block) {
        RngStream rng = RngStream::substream(seed, block);
        const std::size_t count = std::min(kBlock, samples - done);
        for (std::size_t i = 0; i < count; ++i)
            ++counts[static_cast<std::size_t>(q.encode(src.sample(rng)) - 1)];
        done += count;
    }
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(samples);
        h -= p * std::log2(p);
    }
    return h;
}

TailDiagnostic check_tail_condition(const SourceModel& src,
                                    const Computation& g,
                                    const PointDensity& density,
                                    std::span<const double> y_grid) {
    if (g.arity() != 1)
        throw invalid_parameter("check_tail_condition: univariate g only");
    for (std::size_t i = 1; i < y_grid.size(); ++i)
        if (!(y_grid[i] > y_grid[i - 1]))
            throw invalid_parameter("check_tail_condition: y grid must increase");

    TailDiagnostic diag;
    diag.y.assign(y_grid.begin(), y_grid.end());

    quad::Options opts;
    opts.rel_tol = 1e-8;
    opts.tail_scale = 1.0;

    auto one_tail = [&](double y, int direction) -> double {
        // position y in the upper tail, -y in the lower tail
        const double pos = direction > 0 ? y : -y;
        const Interval sup = src.support();
        if (direction > 0 && pos >= sup.hi) return 0.0;
        if (direction < 0 && pos <= sup.lo) return 0.0;

        const double gy = g.eval1(pos);
        auto num_f = [&](double x) {
            const double d = g.eval1(x) - gy;
            return d * d * src.pdf(x);
        };
        quad::Result num;
        if (direction > 0 && sup.hi_finite())
            num = quad::integrate(num_f, pos, sup.hi, opts);
        else if (direction < 0 && sup.lo_finite())
            num = quad::integrate(num_f, sup.lo, pos, opts);
        else
            num = quad::tail_integral(num_f, pos, direction, opts);
        if (!num.converged) {
            diag.violated = true;
            return kInf;
        }
        const double lam_tail = direction > 0 ? 1.0 - density.compressor(pos)
                                              : density.compressor(pos);
        if (lam_tail <= 0.0) {
            if (num.value > 0.0) diag.violated = true;
            return num.value > 0.0 ? kInf : 0.0;
        }
        return num.value / (lam_tail * lam_tail);
    };

    for (double y : y_grid) {
        diag.t_upper.push_back(one_tail(y, +1));
        diag.t_lower.push_back(one_tail(y, -1));
    }

    // Eventually decreasing toward zero: combine the two tails pointwise and
    // require a nonincreasing back half that ends below where it started.
    std::vector<double> t(diag.y.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = std::max(diag.t_upper[i], diag.t_lower[i]);
    bool ok = !diag.violated && !t.empty();
    if (ok) {
        const std::size_t m = t.size() / 2;
        for (std::size_t i = m; ok && i + 1 < t.size(); ++i)
            ok = t[i + 1] <= t[i] * (1.0 + 1e-12);
        const bool all_zero = *std::max_element(t.begin(), t.end()) == 0.0;
        if (!all_zero && ok) ok = t.back() < t.front();
    }
    diag.decreasing = ok;
    return diag;
}

RateAllocation allocate_rates(std::span<const double> constants,
                              double total_bits) {
    const int n = static_cast<int>(constants.size());
    if (n < 1) throw invalid_parameter("allocate_rates: no constants");
    if (!(total_bits > 0.0))
        throw invalid_parameter("allocate_rates: total rate must be > 0");
    for (double a : constants)
        if (!(a > 0.0))
            throw invalid_parameter("allocate_rates: constants must be > 0");

    RateAllocation out;
    out.total_bits = total_bits;
    out.per_source_bits.assign(static_cast<std::size_t>(n), 0.0);

    // Water-filling in the log domain; clip negatives and re-solve over the
    // active set until the solution is feasible.
    std::vector<int> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), 0);
    while (!active.empty()) {
        double log_sum = 0.0;
        for (int i : active)
            log_sum += std::log2(constants[static_cast<std::size_t>(i)]);
        const double m = static_cast<double>(active.size());
        bool feasible = true;
        for (int i : active) {
            const double r =
                total_bits / m +
                0.5 * std::log2(constants[static_cast<std::size_t>(i)]) -
                log_sum / (2.0 * m);
            out.per_source_bits[static_cast<std::size_t>(i)] = r;
            if (r < 0.0) feasible = false;
        }
        if (feasible) break;
        std::vector<int> next;
        for (int i : active) {
            if (out.per_source_bits[static_cast<std::size_t>(i)] < 0.0)
                out.per_source_bits[static_cast<std::size_t>(i)] = 0.0;
            else
                next.push_back(i);
        }
        if (next.size() == active.size() || next.empty())
            throw internal_inconsistency("allocate_rates: active set stalled");
        active = std::move(next);
    }

    out.kappa = 0.0;
    for (double r : out.per_source_bits) out.kappa += std::exp2(r);
    out.alphas.resize(out.per_source_bits.size());
    for (std::size_t i = 0; i < out.alphas.size(); ++i)
        out.alphas[i] = std::exp2(out.per_source_bits[i]) / out.kappa;
    return out;
}

KappaCurve theory_multivariate_limit(const ProductSource& srcs,
                                     std::span<const SensitivityProfile> gammas,
                                     std::span<const PointDensity> densities,
                                     const RateAllocation& alloc) {
    const int n = srcs.dimension();
    if (static_cast<int>(gammas.size()) != n ||
        static_cast<int>(densities.size()) != n ||
        static_cast<int>(alloc.alphas.size()) != n)
        throw invalid_parameter("theory_multivariate_limit: size mismatch");
    double alpha_sum = 0.0;
    for (double a : alloc.alphas) {
        if (!(a > 0.0))
            throw invalid_parameter(
                "theory_multivariate_limit: alphas must be > 0");
        alpha_sum += a;
    }
    if (std::abs(alpha_sum - 1.0) > 1e-9)
        throw invalid_parameter("theory_multivariate_limit: alphas must sum to 1");

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double term = theory_univariate_limit(
            srcs.marginal(i), gammas[static_cast<std::size_t>(i)],
            densities[static_cast<std::size_t>(i)]);
        const double a = alloc.alphas[static_cast<std::size_t>(i)];
        total += term / (a * a);
    }
    return KappaCurve{total};
}

KappaCurve weighted_fmse_theory(const ProductSource& srcs,
                                std::span<const SensitivityProfile> weighted_gammas,
                                std::span<const PointDensity> densities,
                                const RateAllocation& alloc) {
    return theory_multivariate_limit(srcs, weighted_gammas, densities, alloc);
}

RateAllocation equal_allocation(int n_sources, double per_source_bits) {
    if (n_sources < 1)
        throw invalid_parameter("equal_allocation: n_sources must be >= 1");
    RateAllocation out;
    out.total_bits = per_source_bits * n_sources;
    out.per_source_bits.assign(static_cast<std::size_t>(n_sources),
                               per_source_bits);
    out.alphas.assign(static_cast<std::size_t>(n_sources), 1.0 / n_sources);
    out.kappa = n_sources * std::exp2(per_source_bits);
    return out;
}

} // namespace dfsq
