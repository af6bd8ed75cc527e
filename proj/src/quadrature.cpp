#include "dfsq/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace dfsq::quad {

namespace {

// tanh_sinh caches its abscissas, so share one instance per thread.
boost::math::quadrature::tanh_sinh<double>& ts_integrator() {
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    return ts;
}

struct Piece {
    double value = 0.0;
    double error = 0.0;
    bool ok = false;
};

Piece finite_piece(const std::function<double(double)>& f, double a, double b,
                   double tol) {
    Piece p;
    if (!(a < b)) {
        p.ok = true;
        return p;
    }
    try {
        double err = 0.0, l1 = 0.0;
        p.value = ts_integrator().integrate(f, a, b, tol, &err, &l1);
        // tanh_sinh reports err relative to L1; convert to absolute.
        p.error = err * std::max(l1, std::abs(p.value));
        p.ok = std::isfinite(p.value);
    } catch (const std::exception&) {
        p.ok = false;
    }
    return p;
}

// Marches geometrically growing panels into an unbounded tail starting at
// `from`. Stops once two consecutive panels contribute below tolerance;
// reports failure when the panel sequence never decays (divergent tail).
Piece tail_piece(const std::function<double(double)>& f, double from,
                 int direction, const Options& opts, double outer_scale) {
    Piece acc;
    double w = std::max(opts.tail_scale, 1e-8);
    double edge = from;
    int calm = 0;
    for (int j = 0; j < opts.max_tail_doublings; ++j) {
        const double next = edge + direction * w;
        const double lo = direction > 0 ? edge : next;
        const double hi = direction > 0 ? next : edge;
        Piece panel = finite_piece(f, lo, hi, opts.rel_tol);
        if (!panel.ok) return acc; // acc.ok stays false
        acc.value += panel.value;
        acc.error += panel.error;
        if (!std::isfinite(acc.value) || std::abs(acc.value) > 1e200) return acc;

        const double scale =
            std::max({std::abs(acc.value), outer_scale, opts.abs_tol});
        const double floor = std::max(opts.abs_tol, opts.rel_tol * scale);
        if (std::abs(panel.value) <= 0.5 * floor) {
            if (++calm >= 2) {
                acc.ok = true;
                return acc;
            }
        } else {
            calm = 0;
        }
        edge = next;
        w *= 2.0;
    }
    return acc; // panels never settled: divergent (or hopelessly slow)
}

} // namespace

double gk15(const std::function<double(double)>& f, double a, double b,
            double* err) {
    double e = 0.0;
    const double v =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, a, b, 0, 0.0, &e);
    if (err) *err = e;
    return v;
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts) {
    Result r;
    if (!(a < b)) {
        r.converged = true;
        return r;
    }

    std::vector<double> cuts;
    for (double c : opts.breakpoints)
        if (c > a && c < b && std::isfinite(c)) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Anchors for the finite core. A fully infinite range with no cuts is
    // split at zero.
    double lo_anchor = std::isfinite(a) ? a : (cuts.empty() ? 0.0 : cuts.front());
    double hi_anchor = std::isfinite(b) ? b : (cuts.empty() ? 0.0 : cuts.back());
    if (!std::isfinite(a) && !cuts.empty()) lo_anchor = cuts.front();
    if (!std::isfinite(b) && !cuts.empty()) hi_anchor = cuts.back();
    if (lo_anchor > hi_anchor) std::swap(lo_anchor, hi_anchor);

    std::vector<double> nodes;
    nodes.push_back(lo_anchor);
    for (double c : cuts)
        if (c > lo_anchor && c < hi_anchor) nodes.push_back(c);
    nodes.push_back(hi_anchor);

    bool all_ok = true;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        Piece p = finite_piece(f, nodes[i], nodes[i + 1], opts.rel_tol);
        all_ok = all_ok && p.ok;
        r.value += p.value;
        r.error += p.error;
    }

    const double core_scale = std::abs(r.value);
    if (!std::isfinite(b)) {
        Piece p = tail_piece(f, hi_anchor, +1, opts, core_scale);
        all_ok = all_ok && p.ok;
        r.value += p.value;
        r.error += p.error;
    }
    if (!std::isfinite(a)) {
        Piece p = tail_piece(f, lo_anchor, -1, opts, core_scale);
        all_ok = all_ok && p.ok;
        r.value += p.value;
        r.error += p.error;
    }

    const double target =
        std::max(opts.abs_tol, 50.0 * opts.rel_tol * std::abs(r.value));
    r.converged = all_ok && std::isfinite(r.value) &&
                  (r.error <= target || r.error < 1e-300);
    return r;
}

Result tail_integral(const std::function<double(double)>& f, double y,
                     int direction, const Options& opts) {
    Result r;
    Piece p = tail_piece(f, y, direction >= 0 ? +1 : -1, opts, 0.0);
    r.value = p.value;
    r.error = p.error;
    r.converged = p.ok && std::isfinite(p.value);
    return r;
}

} // namespace dfsq::quad
