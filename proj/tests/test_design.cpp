#include <doctest.h>

#include <cmath>

#include "dfsq/errors.hpp"
#include "dfsq/point_density.hpp"
#include "oracles.hpp"

using namespace dfsq;

TEST_CASE("uniform design closed forms") {
    const PointDensity d = design_uniform(Interval{0.0, 1.0});
    CHECK(d.lambda(0.3) == 1.0);
    CHECK(d.lambda(1.5) == 0.0);
    CHECK(d.compressor(0.25) == 0.25);
    CHECK(d.inv_compressor(0.75) == 0.75);
    d.validate();

    const PointDensity w = design_uniform(2.5);
    CHECK(w.lambda(0.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(w.compressor(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    w.validate();

    CHECK_THROWS_AS(design_uniform(Interval{1.0, 1.0}), invalid_parameter);
    CHECK_THROWS_AS(design_uniform(-1.0), invalid_parameter);
}

TEST_CASE("MSE fixed-rate design: gaussian becomes N(0,3)") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const PointDensity d = design_mse_fixed_rate(src);
    d.validate();
    const double s3 = std::sqrt(3.0);
    for (double x : {-4.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
        const double expect =
            std::exp(-x * x / 6.0) / (s3 * std::sqrt(2.0 * M_PI));
        CHECK(d.lambda(x) == doctest::Approx(expect).epsilon(1e-8));
    }
    // compressor equals the scaled error function (a different route than
    // the panel integration used internally)
    const SourceModel wide = SourceModel::gaussian(0.0, s3);
    for (double x : {-3.0, -0.7, 0.0, 1.2, 4.0})
        CHECK(d.compressor(x) == doctest::Approx(wide.cdf(x)).epsilon(1e-8));
}

TEST_CASE("MSE fixed-rate design: exponential becomes rate 1/3") {
    const PointDensity d = design_mse_fixed_rate(SourceModel::exponential(1.0));
    d.validate();
    for (double x : {0.0, 0.5, 1.0, 3.0, 10.0})
        CHECK(d.lambda(x) ==
              doctest::Approx(std::exp(-x / 3.0) / 3.0).epsilon(1e-8));
    CHECK(d.normalization() == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("MSE fixed-rate design: uniform source stays uniform") {
    const PointDensity d = design_mse_fixed_rate(SourceModel::uniform(0, 1));
    d.validate();
    CHECK(d.lambda(0.42) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cauchy has no normalizable f^{1/3} design") {
    // f^{1/3} ~ x^{-2/3}: the normalization integral diverges
    CHECK_THROWS_AS(design_mse_fixed_rate(SourceModel::cauchy(0, 1)),
                    design_infeasible);
}

TEST_CASE("fMSE fixed-rate design with flat sensitivity reduces to MSE") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const auto flat = SensitivityProfile::analytic("1", [](double) { return 1.0; });
    const PointDensity a = design_fmse_fixed_rate(src, flat);
    const PointDensity b = design_mse_fixed_rate(src);
    for (int i = 1; i < 64; ++i) {
        const double u = i / 64.0;
        const double x = b.inv_compressor(u);
        CHECK(std::abs(a.lambda(x) - b.lambda(x)) <= 1e-9);
    }
}

TEST_CASE("fMSE fixed-rate design for gaussian and gamma = 2|x|") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const auto gamma = SensitivityProfile::analytic(
        "2|x|", [](double x) { return 2.0 * std::abs(x); }, {0.0});
    const PointDensity d = design_fmse_fixed_rate(src, gamma);
    d.validate();
    CHECK(d.lambda(0.0) == 0.0);
    CHECK(d.compressor(0.0) == doctest::Approx(0.5).epsilon(1e-8));
    for (double x : {0.3, 1.0, 2.5})
        CHECK(d.lambda(x) == doctest::Approx(d.lambda(-x)).epsilon(1e-9));
    // the unnormalized shape is (4x² φ(x))^{1/3}
    const double z = oracle::simpson_split(
        [&src](double x) { return std::cbrt(4.0 * x * x * src.pdf(x)); }, -40.0,
        40.0, std::vector<double>{0.0});
    CHECK(d.normalization() == doctest::Approx(z).epsilon(1e-8));
}

TEST_CASE("fMSE fixed-rate design for cauchy and gamma = e^{-|x|}") {
    const SourceModel src = SourceModel::cauchy(0, 1);
    const auto gamma = SensitivityProfile::analytic(
        "e^-|x|", [](double x) { return std::exp(-std::abs(x)); });
    const PointDensity d = design_fmse_fixed_rate(src, gamma);
    d.validate();
    const double z = oracle::simpson_split(
        [&src](double x) {
            const double g = std::exp(-std::abs(x));
            return std::cbrt(g * g * src.pdf(x));
        },
        -80.0, 80.0, std::vector<double>{0.0});
    CHECK(d.normalization() == doctest::Approx(z).epsilon(1e-7));
}

TEST_CASE("entropy-constrained designs") {
    SUBCASE("flat gamma on [0,1] is uniform") {
        const auto flat =
            SensitivityProfile::analytic("1", [](double) { return 1.0; });
        const PointDensity d =
            design_fmse_entropy_constrained(flat, Interval{0.0, 1.0});
        d.validate();
        CHECK(d.lambda(0.5) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("exponential gamma has the closed-form normalization") {
        const auto gamma = SensitivityProfile::analytic(
            "e^{-4.5x}", [](double x) { return std::exp(-4.5 * std::max(x, 0.0)); });
        const PointDensity d = design_fmse_entropy_constrained(
            gamma, Interval{0.0, std::numeric_limits<double>::infinity()});
        d.validate();
        for (double x : {0.0, 0.1, 0.5, 1.0})
            CHECK(d.lambda(x) ==
                  doctest::Approx(4.5 * std::exp(-4.5 * x)).epsilon(1e-8));
    }
    SUBCASE("non-integrable gamma over the real line is infeasible") {
        const auto gamma = SensitivityProfile::analytic(
            "2|x|", [](double x) { return 2.0 * std::abs(x); }, {0.0});
        CHECK_THROWS_AS(
            design_fmse_entropy_constrained(gamma, Interval::whole_line()),
            design_infeasible);
    }
}

TEST_CASE("tabulated gamma feeds the design on the union grid") {
    // knots of e^{-x} on [0, 8]; the design should track 1·e^{-x} closely
    std::vector<SensitivityProfile::Knot> knots;
    for (int i = 0; i <= 32; ++i) {
        const double x = 8.0 * i / 32.0;
        knots.push_back({x, std::exp(-x), 0.0});
    }
    const auto gamma = SensitivityProfile::from_table("tab-exp", knots);
    const PointDensity d =
        design_fmse_entropy_constrained(gamma, Interval{0.0, 8.0});
    d.validate();
    // the design shape IS the interpolated profile (no re-tabulation) ...
    for (double x : {0.25, 0.37, 1.0, 3.0, 6.125})
        CHECK(d.lambda(x) * d.normalization() ==
              doctest::Approx(gamma(x)).epsilon(1e-12));
    // ... and its normalization is the interpolant's integral, close to the
    // closed form up to pchip error
    CHECK(d.normalization() ==
          doctest::Approx(1.0 - std::exp(-8.0)).epsilon(0.01));
}

TEST_CASE("every design passes its own invariants (round-trip, mass)") {
    const SourceModel gsrc = SourceModel::gaussian(0, 1);
    const SourceModel esrc = SourceModel::exponential(1.0);
    const auto gamma_sq = SensitivityProfile::analytic(
        "2|x|", [](double x) { return 2.0 * std::abs(x); }, {0.0});
    const auto gamma_exp = SensitivityProfile::analytic(
        "e^-x", [](double x) { return std::exp(-std::max(x, 0.0)); });

    design_mse_fixed_rate(gsrc).validate();
    design_mse_fixed_rate(esrc).validate();
    design_fmse_fixed_rate(gsrc, gamma_sq).validate();
    design_fmse_fixed_rate(esrc, gamma_exp).validate();
    design_fmse_entropy_constrained(
        gamma_exp, Interval{0.0, std::numeric_limits<double>::infinity()})
        .validate();
}
