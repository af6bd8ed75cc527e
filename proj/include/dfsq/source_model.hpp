#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dfsq/interval.hpp"
#include "dfsq/rng.hpp"

namespace dfsq {

enum class SourceKind { uniform, gaussian, exponential, cauchy, derived };

// A scalar probability model: density, distribution function, quantile
// function and an inverse-transform sampler. Immutable after construction and
// safe to share across threads; samplers take an explicit stream so parallel
// callers partition randomness themselves.
//
// Deliberately no mean/variance accessors: the Cauchy family has neither, and
// nothing downstream may assume moments exist.
class SourceModel {
public:
    double pdf(double x) const { return pdf_(x); }
    double cdf(double x) const { return cdf_(x); }
    double inv_cdf(double u) const;

    Interval support() const { return support_; }
    double median() const { return median_; }
    SourceKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    double sample(RngStream& rng) const { return inv_cdf(rng.next_unit()); }
    std::vector<double> sample(RngStream& rng, std::size_t count) const;

    // Factories. Scale parameters must be positive.
    static SourceModel uniform(double lo, double hi);
    static SourceModel gaussian(double mean, double sigma);
    static SourceModel exponential(double rate);
    static SourceModel cauchy(double location, double scale);

    // Pushforward of a symmetric-or-not base variable through x ↦ x².
    // Used by the quantize-the-computation-first baseline.
    static SourceModel squared(const SourceModel& base);

    static SourceModel custom(std::string name,
                              std::function<double(double)> pdf,
                              std::function<double(double)> cdf,
                              std::function<double(double)> inv_cdf,
                              Interval support, double median,
                              SourceKind kind = SourceKind::derived);

private:
    SourceModel() = default;

    // Checks ∫ pdf = 1 by quadrature (1e-9) and quantile/cdf consistency.
    void validate() const;

    std::function<double(double)> pdf_, cdf_, inv_cdf_;
    Interval support_;
    double median_ = 0.0;
    SourceKind kind_ = SourceKind::derived;
    std::string name_;
};

// Product of independent marginals; all multivariate paper examples are iid.
class ProductSource {
public:
    ProductSource() = default;
    explicit ProductSource(std::vector<SourceModel> marginals)
        : marginals_(std::move(marginals)) {}

    static ProductSource iid(const SourceModel& marginal, int n);

    int dimension() const { return static_cast<int>(marginals_.size()); }
    const SourceModel& marginal(int n) const { return marginals_.at(n); }
    const std::vector<SourceModel>& marginals() const { return marginals_; }

    double joint_pdf(std::span<const double> x) const;
    void sample(RngStream& rng, std::span<double> out) const;

private:
    std::vector<SourceModel> marginals_;
};

struct Entropy {
    double value = 0.0;
    bool in_bits = true; // false: nats
    double bits() const { return in_bits ? value : value * 1.4426950408889634; }
};

// Differential entropy by adaptive quadrature of -f log2 f (relative
// tolerance 1e-6, split at the median for heavy tails). Throws
// theory_undefined when the integral fails to converge.
Entropy diff_entropy(const SourceModel& src);

SourceKind source_kind_from_string(const std::string& s);
SourceModel make_source(SourceKind kind, std::span<const double> params);

} // namespace dfsq
