#include "dfsq/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/normal.hpp>

#include "dfsq/errors.hpp"
#include "dfsq/quadrature.hpp"

namespace dfsq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double SourceModel::inv_cdf(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw invalid_input("inv_cdf: probability outside [0,1]");
    }
    return inv_cdf_(u);
}

std::vector<double> SourceModel::sample(RngStream& rng,
                                        std::size_t count) const {
    std::vector<double> out(count);
    for (double& x : out) x = sample(rng);
    return out;
}

void SourceModel::validate() const {
    quad::Options opts;
    opts.rel_tol = 1e-11;
    opts.breakpoints = {median_};
    opts.tail_scale = std::max(1.0, std::abs(median_));
    auto mass = quad::integrate(pdf_, support_.lo, support_.hi, opts);
    if (!mass.converged || std::abs(mass.value - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "source '" << name_ << "': pdf mass " << mass.value
            << " is not 1 within 1e-9";
        throw invalid_parameter(msg.str());
    }
    for (double u : {0.01, 0.25, 0.5, 0.75, 0.99}) {
        if (std::abs(cdf_(inv_cdf_(u)) - u) > 1e-9) {
            throw invalid_parameter("source '" + name_ +
                                    "': cdf(inv_cdf(u)) != u");
        }
    }
}

SourceModel SourceModel::uniform(double lo, double hi) {
    if (!(hi > lo)) throw invalid_parameter("uniform: requires hi > lo");
    SourceModel m;
    const double w = hi - lo;
    m.pdf_ = [lo, hi, w](double x) { return (x >= lo && x <= hi) ? 1.0 / w : 0.0; };
    m.cdf_ = [lo, hi, w](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        return (x - lo) / w;
    };
    m.inv_cdf_ = [lo, w](double u) { return lo + u * w; };
    m.support_ = {lo, hi};
    m.median_ = lo + 0.5 * w;
    m.kind_ = SourceKind::uniform;
    std::ostringstream n;
    n << "uniform(" << lo << "," << hi << ")";
    m.name_ = n.str();
    m.validate();
    return m;
}

SourceModel SourceModel::gaussian(double mean, double sigma) {
    if (!(sigma > 0.0)) throw invalid_parameter("gaussian: sigma must be > 0");
    boost::math::normal_distribution<double> d(mean, sigma);
    SourceModel m;
    m.pdf_ = [d](double x) { return boost::math::pdf(d, x); };
    m.cdf_ = [d](double x) { return boost::math::cdf(d, x); };
    m.inv_cdf_ = [d](double u) {
        if (u <= 0.0) return -kInf;
        if (u >= 1.0) return kInf;
        return boost::math::quantile(d, u);
    };
    m.support_ = Interval::whole_line();
    m.median_ = mean;
    m.kind_ = SourceKind::gaussian;
    std::ostringstream n;
    n << "gaussian(" << mean << "," << sigma << ")";
    m.name_ = n.str();
    m.validate();
    return m;
}

SourceModel SourceModel::exponential(double rate) {
    if (!(rate > 0.0)) throw invalid_parameter("exponential: rate must be > 0");
    SourceModel m;
    m.pdf_ = [rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); };
    m.cdf_ = [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
    m.inv_cdf_ = [rate](double u) {
        if (u >= 1.0) return kInf;
        return -std::log1p(-u) / rate;
    };
    m.support_ = {0.0, kInf};
    m.median_ = std::log(2.0) / rate;
    m.kind_ = SourceKind::exponential;
    std::ostringstream n;
    n << "exponential(" << rate << ")";
    m.name_ = n.str();
    m.validate();
    return m;
}

SourceModel SourceModel::cauchy(double location, double scale) {
    if (!(scale > 0.0)) throw invalid_parameter("cauchy: scale must be > 0");
    boost::math::cauchy_distribution<double> d(location, scale);
    SourceModel m;
    m.pdf_ = [d](double x) { return boost::math::pdf(d, x); };
    m.cdf_ = [d](double x) { return boost::math::cdf(d, x); };
    m.inv_cdf_ = [d](double u) {
        if (u <= 0.0) return -kInf;
        if (u >= 1.0) return kInf;
        return boost::math::quantile(d, u);
    };
    m.support_ = Interval::whole_line();
    m.median_ = location;
    m.kind_ = SourceKind::cauchy;
    std::ostringstream n;
    n << "cauchy(" << location << "," << scale << ")";
    m.name_ = n.str();
    m.validate();
    return m;
}

SourceModel SourceModel::squared(const SourceModel& base) {
    // Y = X^2: f_Y(y) = (f_X(√y) + f_X(-√y)) / (2√y) on y > 0,
    // F_Y(y) = F_X(√y) - F_X(-√y). The quantile is found by bisection on the
    // monotone F_Y (80 rounds: bracket shrinks below representable spacing).
    SourceModel bm = base; // keep a value copy alive inside the closures
    auto pdf = [bm](double y) {
        if (y <= 0.0) return 0.0;
        const double r = std::sqrt(y);
        return (bm.pdf(r) + bm.pdf(-r)) / (2.0 * r);
    };
    auto cdf = [bm](double y) {
        if (y <= 0.0) return 0.0;
        const double r = std::sqrt(y);
        return bm.cdf(r) - bm.cdf(-r);
    };
    auto inv = [cdf](double u) {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return kInf;
        double lo = 0.0, hi = 1.0;
        while (cdf(hi) < u && hi < 1e154) hi *= 2.0;
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double med = inv(0.5);
    return custom(base.name() + "^2", pdf, cdf, inv, {0.0, kInf}, med);
}

SourceModel SourceModel::custom(std::string name,
                                std::function<double(double)> pdf,
                                std::function<double(double)> cdf,
                                std::function<double(double)> inv_cdf,
                                Interval support, double median,
                                SourceKind kind) {
    SourceModel m;
    m.pdf_ = std::move(pdf);
    m.cdf_ = std::move(cdf);
    m.inv_cdf_ = std::move(inv_cdf);
    m.support_ = support;
    m.median_ = median;
    m.kind_ = kind;
    m.name_ = std::move(name);
    m.validate();
    return m;
}

ProductSource ProductSource::iid(const SourceModel& marginal, int n) {
    if (n < 1) throw invalid_parameter("ProductSource::iid: n must be >= 1");
    std::vector<SourceModel> ms(static_cast<std::size_t>(n), marginal);
    return ProductSource(std::move(ms));
}

double ProductSource::joint_pdf(std::span<const double> x) const {
    if (x.size() != marginals_.size())
        throw invalid_input("joint_pdf: dimension mismatch");
    double p = 1.0;
    for (std::size_t i = 0; i < marginals_.size(); ++i)
        p *= marginals_[i].pdf(x[i]);
    return p;
}

void ProductSource::sample(RngStream& rng, std::span<double> out) const {
    if (out.size() != marginals_.size())
        throw invalid_input("sample: dimension mismatch");
    for (std::size_t i = 0; i < marginals_.size(); ++i)
        out[i] = marginals_[i].sample(rng);
}

Entropy diff_entropy(const SourceModel& src) {
    auto integrand = [&src](double x) {
        const double f = src.pdf(x);
        return f > 0.0 ? -f * std::log2(f) : 0.0;
    };
    quad::Options opts;
    opts.rel_tol = 1e-9;
    opts.breakpoints = {src.median()};
    opts.tail_scale = std::max(1.0, std::abs(src.median()));
    auto r = quad::integrate(integrand, src.support().lo, src.support().hi, opts);
    if (!r.converged) {
        throw theory_undefined("diff_entropy: integral did not converge for " +
                               src.name());
    }
    return Entropy{r.value, true};
}

SourceKind source_kind_from_string(const std::string& s) {
    if (s == "uniform") return SourceKind::uniform;
    if (s == "gaussian" || s == "normal") return SourceKind::gaussian;
    if (s == "exponential") return SourceKind::exponential;
    if (s == "cauchy") return SourceKind::cauchy;
    throw invalid_parameter("unknown source kind: " + s);
}

SourceModel make_source(SourceKind kind, std::span<const double> params) {
    auto p = [&params](std::size_t i, double dflt) {
        return i < params.size() ? params[i] : dflt;
    };
    switch (kind) {
        case SourceKind::uniform:
            return SourceModel::uniform(p(0, 0.0), p(1, 1.0));
        case SourceKind::gaussian:
            return SourceModel::gaussian(p(0, 0.0), p(1, 1.0));
        case SourceKind::exponential:
            return SourceModel::exponential(p(0, 1.0));
        case SourceKind::cauchy:
            return SourceModel::cauchy(p(0, 0.0), p(1, 1.0));
        case SourceKind::derived:
            break;
    }
    throw invalid_parameter("make_source: kind has no closed-form family");
}

} // namespace dfsq
