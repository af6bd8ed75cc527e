#pragma once

#include <functional>
#include <vector>

namespace dfsq::quad {

struct Options {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;
    // Interior points the integrand is split at (kinks, density zeros,
    // distribution medians). Points outside the integration range are ignored.
    std::vector<double> breakpoints;
    // Width of the first panel when marching into an unbounded tail.
    double tail_scale = 1.0;
    // Cap on tail panel doublings before the integral is declared divergent.
    int max_tail_doublings = 64;
};

struct Result {
    double value = 0.0;
    double error = 0.0; // absolute error estimate
    bool converged = false;
};

// Integrates f over [a, b]; either endpoint may be infinite. Finite pieces use
// tanh-sinh panels (robust to integrable endpoint singularities, which is why
// callers split at density zeros); unbounded tails are summed over
// geometrically growing panels until the additions fall below tolerance.
// A tail whose panels never decay is reported as non-converged rather than
// silently truncated.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

// One-sided tail integral over [y, +inf) (direction = +1) or (-inf, y]
// (direction = -1). Same panel-doubling rules as integrate().
Result tail_integral(const std::function<double(double)>& f, double y,
                     int direction, const Options& opts = {});

// Non-adaptive 15-point Gauss-Kronrod on a finite panel; err receives the
// embedded error estimate. Building block for the point-density compressor.
double gk15(const std::function<double(double)>& f, double a, double b,
            double* err = nullptr);

} // namespace dfsq::quad
