#include "dfsq/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

// boost 1.74 pchip.hpp calls unqualified isnan; make it visible first.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "dfsq/errors.hpp"

namespace dfsq {

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

struct SensitivityProfile::Impl {
    std::string name;
    std::function<double(double)> eval; // analytic form
    std::vector<Knot> knots;            // tabulated form
    std::shared_ptr<Pchip> interp;
    double x_lo = 0.0, x_hi = 0.0;      // knot range for clamping
    std::vector<double> zeros;
    std::size_t samples_per_point = 0;
    std::uint64_t seed = 0;
};

double SensitivityProfile::operator()(double x) const {
    const Impl& im = *impl_;
    if (im.interp) {
        // Clamp: constant extrapolation beyond the last knot.
        const double xc = std::clamp(x, im.x_lo, im.x_hi);
        return std::max(0.0, (*im.interp)(xc));
    }
    return im.eval(x);
}

bool SensitivityProfile::is_tabulated() const { return impl_->interp != nullptr; }

std::span<const SensitivityProfile::Knot> SensitivityProfile::knots() const {
    return impl_->knots;
}

const std::vector<double>& SensitivityProfile::zeros() const {
    return impl_->zeros;
}

const std::string& SensitivityProfile::name() const { return impl_->name; }

void SensitivityProfile::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw error("cannot write " + path);
    out << "# sensitivity profile: " << impl_->name << "\n";
    if (is_tabulated()) {
        out << "# knots: " << impl_->knots.size()
            << ", samples_per_point: " << impl_->samples_per_point
            << ", seed: " << impl_->seed << "\n";
        out << "# interpolation: monotone pchip, constant beyond last knot\n";
    }
    out << "x,gamma\n";
    char buf[80];
    if (is_tabulated()) {
        for (const Knot& k : impl_->knots) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", k.x, k.gamma);
            out << buf;
        }
    } else {
        // analytic profile: dump a reference grid for plotting
        for (int i = 0; i <= 512; ++i) {
            const double x = impl_->x_lo + (impl_->x_hi - impl_->x_lo) * i / 512.0;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x, (*this)(x));
            out << buf;
        }
    }
}

SensitivityProfile SensitivityProfile::analytic(
    std::string name, std::function<double(double)> eval,
    std::vector<double> zeros) {
    auto im = std::make_shared<Impl>();
    im->name = std::move(name);
    im->eval = std::move(eval);
    im->zeros = std::move(zeros);
    im->x_lo = -8.0;
    im->x_hi = 8.0; // plotting range only
    SensitivityProfile p;
    p.impl_ = std::move(im);
    return p;
}

SensitivityProfile SensitivityProfile::from_table(std::string name,
                                                  std::vector<Knot> knots,
                                                  std::size_t samples_per_point,
                                                  std::uint64_t seed) {
    if (knots.size() < 4)
        throw invalid_parameter("tabulated profile needs at least 4 knots");
    std::sort(knots.begin(), knots.end(),
              [](const Knot& a, const Knot& b) { return a.x < b.x; });
    std::vector<double> xs, ys;
    xs.reserve(knots.size());
    ys.reserve(knots.size());
    for (const Knot& k : knots) {
        if (!(k.gamma >= 0.0))
            throw invalid_parameter("profile knot with negative value");
        if (!xs.empty() && !(k.x > xs.back()))
            throw invalid_parameter("profile knots must be strictly increasing");
        xs.push_back(k.x);
        ys.push_back(k.gamma);
    }
    auto im = std::make_shared<Impl>();
    im->name = std::move(name);
    im->x_lo = xs.front();
    im->x_hi = xs.back();
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ys[i] == 0.0) im->zeros.push_back(xs[i]);
    im->knots = std::move(knots);
    im->samples_per_point = samples_per_point;
    im->seed = seed;
    im->interp = std::make_shared<Pchip>(std::move(xs), std::move(ys));
    SensitivityProfile p;
    p.impl_ = std::move(im);
    return p;
}

SensitivityProfile univariate_sensitivity(const Computation& g) {
    if (g.arity() != 1)
        throw invalid_parameter("univariate_sensitivity: arity must be 1");
    if (g.output_dim() != 1)
        throw invalid_parameter("univariate_sensitivity: scalar output only");
    std::vector<double> zeros;
    if (g.name() == "square") zeros = {0.0};
    Computation gc = g;
    return SensitivityProfile::analytic(
        "|" + g.name() + "'|",
        [gc](double x) { return std::abs(gc.partial1(x)); }, std::move(zeros));
}

namespace {

// Shared driver for the conditional-second-moment estimators. weight_sq maps
// the per-draw partial vector to the quantity averaged before square-rooting.
SensitivityProfile conditional_profile_mc(
    const std::string& label, const Computation& g, const ProductSource& src,
    int n, std::span<const double> grid, std::size_t samples_per_point,
    std::uint64_t seed,
    const std::function<double(std::span<const double>)>& weight_sq) {
    const int dim = src.dimension();
    if (g.arity() != dim)
        throw invalid_parameter("sensitivity: computation arity != source dim");
    if (n < 0 || n >= dim)
        throw invalid_parameter("sensitivity: coordinate index out of range");
    if (samples_per_point < 1000)
        throw invalid_parameter("sensitivity: samples_per_point must be >= 1000");
    if (grid.size() < 4)
        throw invalid_parameter("sensitivity: grid needs at least 4 points");

    std::vector<SensitivityProfile::Knot> knots;
    knots.reserve(grid.size());
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> gn(static_cast<std::size_t>(g.output_dim()));

    for (std::size_t ki = 0; ki < grid.size(); ++ki) {
        RngStream rng = RngStream::substream(seed, ki);
        x[static_cast<std::size_t>(n)] = grid[ki];

        double sum = 0.0, sum_sq = 0.0;
        std::size_t got = 0, attempts = 0;
        const std::size_t max_attempts = 100 * samples_per_point;
        while (got < samples_per_point && attempts < max_attempts) {
            ++attempts;
            for (int j = 0; j < dim; ++j)
                if (j != n) x[static_cast<std::size_t>(j)] = src.marginal(j).sample(rng);
            if (g.nonsmooth_at(x)) continue; // measure zero: resample
            g.partial(n, x, gn);
            const double w = weight_sq(gn);
            sum += w;
            sum_sq += w * w;
            ++got;
        }
        if (got == 0)
            throw estimation_failure(
                "sensitivity: every draw hit the non-smooth set at x=" +
                std::to_string(grid[ki]));

        const double m = sum / static_cast<double>(got);
        const double var =
            got > 1 ? std::max(0.0, (sum_sq / static_cast<double>(got) - m * m) *
                                        static_cast<double>(got) /
                                        static_cast<double>(got - 1))
                    : 0.0;
        const double se_m = std::sqrt(var / static_cast<double>(got));
        SensitivityProfile::Knot k;
        k.x = grid[ki];
        k.gamma = std::sqrt(std::max(0.0, m));
        // Delta method; when the mean is ~0 the sqrt has no linearization, so
        // fall back to the width of the [0, m+se] image.
        k.stderr_gamma = k.gamma > 0.0 ? se_m / (2.0 * k.gamma)
                                       : std::sqrt(se_m);
        knots.push_back(k);
    }
    return SensitivityProfile::from_table(label, std::move(knots),
                                          samples_per_point, seed);
}

} // namespace

SensitivityProfile multivariate_sensitivity_mc(const Computation& g,
                                               const ProductSource& src, int n,
                                               std::span<const double> grid,
                                               std::size_t samples_per_point,
                                               std::uint64_t seed) {
    if (g.output_dim() != 1)
        throw invalid_parameter("multivariate_sensitivity_mc: scalar g only");
    return conditional_profile_mc(
        "gamma_" + std::to_string(n) + "[" + g.name() + "]", g, src, n, grid,
        samples_per_point, seed,
        [](std::span<const double> gn) { return gn[0] * gn[0]; });
}

SensitivityProfile min_exponential_sensitivity(int n_sources, double rate) {
    if (n_sources < 2)
        throw invalid_parameter("min_exponential_sensitivity: N must be >= 2");
    if (!(rate > 0.0))
        throw invalid_parameter("min_exponential_sensitivity: rate must be > 0");
    const double a = rate * (n_sources - 1) / 2.0;
    return SensitivityProfile::analytic(
        "min_exponential(N=" + std::to_string(n_sources) + ")",
        [a](double x) { return std::exp(-a * std::max(x, 0.0)); });
}

SensitivityProfile weighted_sensitivity(const Computation& g,
                                        const ProductSource& src, int n,
                                        std::span<const double> weights,
                                        std::span<const double> grid,
                                        std::size_t samples_per_point,
                                        std::uint64_t seed) {
    if (static_cast<int>(weights.size()) != g.output_dim())
        throw invalid_parameter("weighted_sensitivity: weight count != outputs");
    double total = 0.0;
    for (double b : weights) {
        if (b < 0.0)
            throw invalid_parameter("weighted_sensitivity: negative weight");
        total += b;
    }
    if (!(total > 0.0))
        throw invalid_parameter("weighted_sensitivity: weights all zero");
    std::vector<double> beta(weights.begin(), weights.end());
    return conditional_profile_mc(
        "gamma_" + std::to_string(n) + "[" + g.name() + ",weighted]", g, src, n,
        grid, samples_per_point, seed,
        [beta](std::span<const double> gn) {
            double s = 0.0;
            for (std::size_t m = 0; m < beta.size(); ++m)
                s += beta[m] * gn[m] * gn[m];
            return s;
        });
}

std::vector<double> quantile_grid(const SourceModel& marginal, int count) {
    if (count < 4) throw invalid_parameter("quantile_grid: count must be >= 4");
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(count) + 2);
    const double u0 = 0.5 / count;
    xs.push_back(marginal.inv_cdf(u0 / 8.0)); // one knot into each tail
    for (int j = 0; j < count; ++j)
        xs.push_back(marginal.inv_cdf((j + 0.5) / count));
    xs.push_back(marginal.inv_cdf(1.0 - u0 / 8.0));
    return xs;
}

} // namespace dfsq
