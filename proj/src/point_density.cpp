#include "dfsq/point_density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dfsq/errors.hpp"
#include "dfsq/quadrature.hpp"

namespace dfsq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPanelMassTol = 1e-10; // per-panel mass error, normalized
constexpr double kTailMassTol = 1e-12;  // residual tail mass of λ
constexpr double kInvTol = 1e-12;       // inverse-compressor probability tol
} // namespace

struct PointDensity::Impl {
    std::string name;
    std::function<double(double)> shape; // unnormalized, clamped >= 0
    Interval support;
    double z = 1.0; // normalization constant

    // Panel edges and cumulative normalized mass at each edge. The window
    // [edges.front(), edges.back()] carries all but < 1e-12 of the mass.
    std::vector<double> edges;
    std::vector<double> cum;

    // Closed-form overrides (uniform designs).
    std::function<double(double)> exact_compressor;
    std::function<double(double)> exact_inverse;

    double eval_shape(double x) const {
        if (x < support.lo || x > support.hi) return 0.0;
        const double v = shape(x);
        return v > 0.0 ? v : 0.0;
    }
};

namespace {

// Recursively bisects [a, b] until the embedded GK15 error estimate of the
// panel mass is below tol, appending refined panels in order.
void refine_panel(const std::function<double(double)>& f, double a, double b,
                  double tol, int depth, std::vector<double>& edges,
                  std::vector<double>& masses) {
    double err = 0.0;
    const double m = quad::gk15(f, a, b, &err);
    const double width_floor = 1e-13 * (std::abs(a) + std::abs(b) + 1.0);
    if (err <= tol || depth >= 42 || (b - a) <= width_floor) {
        edges.push_back(b);
        masses.push_back(m);
        return;
    }
    const double mid = 0.5 * (a + b);
    refine_panel(f, a, mid, 0.5 * tol, depth + 1, edges, masses);
    refine_panel(f, mid, b, 0.5 * tol, depth + 1, edges, masses);
}

// Marches geometrically growing panels toward an unbounded end until two
// consecutive contributions fall below the residual-mass threshold; the outer
// edges visited are appended in marching order. Returns false when the shape
// is not integrable in that direction.
bool march_tail(const std::function<double(double)>& f, double start,
                int direction, double scale, double& total,
                std::vector<double>& outer_edges) {
    double w = std::max(scale, 1e-6);
    double edge = start;
    int calm = 0;
    for (int j = 0; j < 64; ++j) {
        const double next = edge + direction * w;
        const double a = direction > 0 ? edge : next;
        const double b = direction > 0 ? next : edge;
        const double m = quad::gk15(f, a, b);
        outer_edges.push_back(next);
        total += m;
        if (!std::isfinite(total) || total > 1e250) return false;
        if (m <= 0.5 * kTailMassTol * std::max(total, 1e-300)) {
            if (++calm >= 2) return true;
        } else {
            calm = 0;
        }
        edge = next;
        w *= 2.0;
    }
    return false;
}

} // namespace

double PointDensity::lambda(double x) const {
    return impl_->eval_shape(x) / impl_->z;
}

double PointDensity::compressor(double x) const {
    const Impl& im = *impl_;
    if (im.exact_compressor) return im.exact_compressor(x);
    if (im.edges.empty()) throw error("point density has no compressor table");
    if (x <= im.edges.front()) return 0.0;
    if (x >= im.edges.back()) return 1.0;
    const auto it = std::upper_bound(im.edges.begin(), im.edges.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - im.edges.begin()) - 1;
    const double partial =
        quad::gk15([&im](double t) { return im.eval_shape(t); }, im.edges[i], x);
    return std::clamp(im.cum[i] + partial / im.z, 0.0, 1.0);
}

double PointDensity::inv_compressor(double u) const {
    const Impl& im = *impl_;
    if (!(u >= 0.0 && u <= 1.0))
        throw invalid_input("inv_compressor: probability outside [0,1]");
    if (im.exact_inverse) return im.exact_inverse(u);
    if (im.edges.empty()) throw error("point density has no compressor table");
    if (u <= im.cum.front()) return im.edges.front();
    if (u >= im.cum.back()) return im.edges.back();

    const auto it = std::upper_bound(im.cum.begin(), im.cum.end(), u);
    std::size_t i = static_cast<std::size_t>(it - im.cum.begin());
    if (i > 0) --i;
    double lo = im.edges[i], hi = im.edges[i + 1];
    const double mass = im.cum[i + 1] - im.cum[i];
    if (!(mass > 0.0)) return 0.5 * (lo + hi);

    auto shape = [&im](double t) { return im.eval_shape(t); };
    double x = lo + (hi - lo) * std::clamp((u - im.cum[i]) / mass, 0.0, 1.0);
    for (int iter = 0; iter < 80; ++iter) {
        const double c = std::clamp(
            im.cum[i] + quad::gk15(shape, im.edges[i], x) / im.z, 0.0, 1.0);
        const double resid = c - u;
        if (std::abs(resid) <= kInvTol) return x;
        (resid > 0.0 ? hi : lo) = x;
        const double d = shape(x) / im.z;
        double next = d > 0.0 ? x - resid / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
        if (hi - lo <= 1e-15 * (std::abs(lo) + std::abs(hi) + 1.0)) return x;
    }
    return x;
}

Interval PointDensity::support() const { return impl_->support; }
double PointDensity::normalization() const { return impl_->z; }
const std::string& PointDensity::name() const { return impl_->name; }

void PointDensity::validate() const {
    const Impl& im = *impl_;

    // Unit mass, checked through the tanh-sinh route rather than the GK15
    // panel sums used during construction.
    quad::Options opts;
    opts.rel_tol = 1e-11;
    if (!im.edges.empty()) {
        opts.breakpoints = {im.edges.front(),
                            im.edges[im.edges.size() / 2],
                            im.edges.back()};
    }
    auto mass = quad::integrate([this](double x) { return lambda(x); },
                                im.support.lo, im.support.hi, opts);
    if (!mass.converged || std::abs(mass.value - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "point density '" << im.name << "': mass " << mass.value;
        throw design_infeasible(msg.str());
    }

    // Monotone compressor, round-trip inverse, and strict increase across a
    // quantile grid (the λ > 0 a.e. requirement: no zero-mass subinterval).
    double prev_x = -kInf, prev_c = -1.0;
    for (int j = 1; j < 512; ++j) {
        const double u = static_cast<double>(j) / 512.0;
        const double x = inv_compressor(u);
        const double c = compressor(x);
        if (std::abs(c - u) > 1e-8)
            throw design_infeasible("point density '" + im.name +
                                    "': compressor round-trip failed");
        if (!(x >= prev_x) || !(c > prev_c))
            throw design_infeasible("point density '" + im.name +
                                    "': compressor not strictly increasing");
        prev_x = x;
        prev_c = c;
    }
}

void PointDensity::save_csv(const std::string& path, int rows) const {
    std::ofstream out(path);
    if (!out) throw error("cannot write " + path);
    out << "# point density: " << impl_->name << "\n";
    out << "# normalization: " << impl_->z << "\n";
    out << "x,lambda,compressor\n";
    char buf[120];
    for (int j = 0; j < rows; ++j) {
        const double u = (j + 0.5) / rows;
        const double x = inv_compressor(u);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, lambda(x),
                      compressor(x));
        out << buf;
    }
}

PointDensity PointDensity::uniform(Interval iv) {
    if (!iv.finite() || iv.empty())
        throw invalid_parameter("uniform design needs a nonempty finite interval");
    auto im = std::make_shared<Impl>();
    const double lo = iv.lo, hi = iv.hi, w = iv.width();
    std::ostringstream n;
    n << "uniform[" << lo << "," << hi << "]";
    im->name = n.str();
    im->shape = [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; };
    im->support = iv;
    im->z = w;
    im->edges = {lo, hi};
    im->cum = {0.0, 1.0};
    im->exact_compressor = [lo, hi, w](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        return (x - lo) / w;
    };
    im->exact_inverse = [lo, w](double u) { return lo + u * w; };
    PointDensity d;
    d.impl_ = std::move(im);
    return d;
}

PointDensity PointDensity::from_unnormalized(std::string name,
                                             std::function<double(double)> shape,
                                             Interval support,
                                             BuildOptions opts) {
    if (support.empty())
        throw invalid_parameter("point density: empty support");

    auto im = std::make_shared<Impl>();
    im->name = std::move(name);
    im->shape = std::move(shape);
    im->support = support;
    auto f = [&im](double x) { return im->eval_shape(x); };

    // Seed nodes: finite support ends plus interior breakpoints. With both
    // ends infinite and no breakpoints, anchor at 0.
    std::vector<double> seeds;
    if (support.lo_finite()) seeds.push_back(support.lo);
    for (double c : opts.breakpoints)
        if (std::isfinite(c) && c > support.lo && c < support.hi)
            seeds.push_back(c);
    if (support.hi_finite()) seeds.push_back(support.hi);
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    if (seeds.empty()) seeds.push_back(0.0);
    if (seeds.size() == 1 && !support.finite()) {
        // give the core some width so the tail march starts sensibly
        seeds.push_back(seeds.front() + std::max(opts.scale_hint, 1e-6));
        std::sort(seeds.begin(), seeds.end());
    }

    // Coarse core mass, then tail windows.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < seeds.size(); ++i)
        total += quad::gk15(f, seeds[i], seeds[i + 1]);

    std::vector<double> upper_edges, lower_edges;
    if (!support.hi_finite()) {
        if (!march_tail(f, seeds.back(), +1, opts.scale_hint, total,
                        upper_edges))
            throw design_infeasible("point density '" + im->name +
                                    "': normalization integral diverges (+)");
    }
    if (!support.lo_finite()) {
        if (!march_tail(f, seeds.front(), -1, opts.scale_hint, total,
                        lower_edges))
            throw design_infeasible("point density '" + im->name +
                                    "': normalization integral diverges (-)");
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw design_infeasible("point density '" + im->name +
                                "': shape has no mass");

    // Full window node list (tail edges keep their geometric spacing), then
    // adaptive refinement against the coarse total.
    std::vector<double> nodes(lower_edges.rbegin(), lower_edges.rend());
    nodes.insert(nodes.end(), seeds.begin(), seeds.end());
    nodes.insert(nodes.end(), upper_edges.begin(), upper_edges.end());

    const double tol = kPanelMassTol * total;
    std::vector<double> edges, masses;
    edges.push_back(nodes.front());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        refine_panel(f, nodes[i], nodes[i + 1], tol, 0, edges, masses);

    double z = 0.0;
    for (double m : masses) z += std::max(m, 0.0);
    if (!(z > 0.0))
        throw design_infeasible("point density '" + im->name +
                                "': zero total mass after refinement");
    im->z = z;
    im->edges = std::move(edges);
    im->cum.resize(im->edges.size());
    im->cum[0] = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i)
        im->cum[i + 1] = im->cum[i] + std::max(masses[i], 0.0) / z;
    im->cum.back() = std::min(im->cum.back(), 1.0);

    PointDensity d;
    d.impl_ = std::move(im);
    return d;
}

PointDensity design_mse_fixed_rate(const SourceModel& src) {
    SourceModel s = src;
    PointDensity::BuildOptions opts;
    opts.breakpoints = {src.median()};
    const double spread =
        std::abs(src.inv_cdf(0.84) - src.inv_cdf(0.16)) / 2.0;
    opts.scale_hint = std::max(spread, 1e-3);
    return PointDensity::from_unnormalized(
        "mse_fr[" + src.name() + "]",
        [s](double x) { return std::cbrt(s.pdf(x)); }, src.support(), opts);
}

PointDensity design_fmse_fixed_rate(const SourceModel& src,
                                    const SensitivityProfile& gamma) {
    SourceModel s = src;
    SensitivityProfile g = gamma;
    PointDensity::BuildOptions opts;
    opts.breakpoints.push_back(src.median());
    for (double z : gamma.zeros()) opts.breakpoints.push_back(z);
    // Tabulated γ: seed panels at every knot so the product (γ²f)^{1/3} is
    // formed pointwise on the union of both grids.
    for (const auto& k : gamma.knots()) opts.breakpoints.push_back(k.x);
    const double spread =
        std::abs(src.inv_cdf(0.84) - src.inv_cdf(0.16)) / 2.0;
    opts.scale_hint = std::max(spread, 1e-3);
    return PointDensity::from_unnormalized(
        "fmse_fr[" + src.name() + "," + gamma.name() + "]",
        [s, g](double x) {
            const double gv = g(x);
            return std::cbrt(gv * gv * s.pdf(x));
        },
        src.support(), opts);
}

PointDensity design_fmse_entropy_constrained(const SensitivityProfile& gamma,
                                             Interval support) {
    SensitivityProfile g = gamma;
    PointDensity::BuildOptions opts;
    for (double z : gamma.zeros()) opts.breakpoints.push_back(z);
    for (const auto& k : gamma.knots()) opts.breakpoints.push_back(k.x);
    return PointDensity::from_unnormalized(
        "fmse_ec[" + gamma.name() + "]", [g](double x) { return g(x); },
        support, opts);
}

PointDensity design_uniform(Interval iv) { return PointDensity::uniform(iv); }

PointDensity design_uniform(double halfwidth) {
    if (!(halfwidth > 0.0))
        throw invalid_parameter("design_uniform: halfwidth must be > 0");
    return PointDensity::uniform({-halfwidth, halfwidth});
}

} // namespace dfsq
