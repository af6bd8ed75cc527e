#include <doctest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "dfsq/errors.hpp"
#include "dfsq/quantizer.hpp"
#include "dfsq/rng.hpp"
#include "oracles.hpp"

using namespace dfsq;

TEST_CASE("uniform density, K=4: boundaries and codewords") {
    const PointDensity d = design_uniform(Interval{0.0, 1.0});
    const CompandingQuantizer q = build_quantizer(d, 4);
    REQUIRE(q.size() == 4);
    CHECK(q.boundaries()[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(q.boundaries()[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(q.boundaries()[2] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(q.decode(1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(q.decode(2) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(q.decode(3) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(q.decode(4) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("exponential density, K=4: closed-form boundaries") {
    const PointDensity d = PointDensity::from_unnormalized(
        "exp", [](double x) { return std::exp(-x); },
        Interval{0.0, std::numeric_limits<double>::infinity()});
    const CompandingQuantizer q = build_quantizer(d, 4);
    CHECK(q.boundaries()[0] == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-9));
    CHECK(q.boundaries()[1] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(q.boundaries()[2] == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("symmetric design with even K puts a boundary at zero") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const auto gamma = SensitivityProfile::analytic(
        "2|x|", [](double x) { return 2.0 * std::abs(x); }, {0.0});
    const PointDensity d = design_fmse_fixed_rate(src, gamma);
    const CompandingQuantizer q = build_quantizer(d, 8);
    CHECK(std::abs(q.boundaries()[3]) < 1e-8); // p_{K/2}
}

TEST_CASE("encode: tie rule and overload cells") {
    const PointDensity d = design_uniform(Interval{0.0, 1.0});
    const CompandingQuantizer q = build_quantizer(d, 4);
    CHECK(q.encode(0.3) == 2);
    CHECK(q.encode(0.5) == 2);  // boundary belongs to the left-closed cell
    CHECK(q.encode(-1e10) == 1);
    CHECK(q.encode(1e10) == 4);
    CHECK_THROWS_AS(q.encode(std::nan("")), invalid_input);
    CHECK_THROWS_AS(q.decode(0), invalid_input);
    CHECK_THROWS_AS(q.decode(5), invalid_input);
    CHECK_THROWS_AS(build_quantizer(d, 2), invalid_parameter);
}

TEST_CASE("cell masses are 1/K under the density (quadrature check)") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const PointDensity d = design_mse_fixed_rate(src);
    const int K = 16;
    const CompandingQuantizer q = build_quantizer(d, K);
    for (int k = 1; k <= K; ++k) {
        const double lo = k == 1 ? -60.0 : q.cell_lo(k);
        const double hi = k == K ? 60.0 : q.cell_hi(k);
        const double mass =
            oracle::simpson([&](double x) { return d.lambda(x); }, lo, hi, 1e-13);
        CHECK(std::abs(mass - 1.0 / K) < 1e-6);
    }
}

TEST_CASE("regularity: codewords sit inside their (closed) cells") {
    // The extremal rule pins c_K to the boundary p_{K-1}, so the top codeword
    // sits on the closure of its cell; interior codewords are strictly inside.
    const PointDensity d = PointDensity::from_unnormalized(
        "exp", [](double x) { return std::exp(-x); },
        Interval{0.0, std::numeric_limits<double>::infinity()});
    const CompandingQuantizer q = build_quantizer(d, 12);
    for (int k = 1; k <= q.size(); ++k) {
        CHECK(q.decode(k) >= q.cell_lo(k));
        CHECK(q.decode(k) <= q.cell_hi(k));
        if (k > 1 && k < q.size()) CHECK(q.decode(k) > q.cell_lo(k));
    }
}

TEST_CASE("round trip: decode lands in the encoding cell; encode is monotone") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const auto gamma = SensitivityProfile::analytic(
        "2|x|", [](double x) { return 2.0 * std::abs(x); }, {0.0});
    const PointDensity d = design_fmse_fixed_rate(src, gamma);
    const CompandingQuantizer q = build_quantizer(d, 37);

    RngStream rng(64);
    int prev_k = 1;
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) xs.push_back(8.0 * rng.next_unit() - 4.0);
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        const int k = q.encode(x);
        const double c = q.decode(k);
        CHECK(c >= q.cell_lo(k)); // closure: c_K equals its lower boundary
        CHECK(c <= q.cell_hi(k));
        CHECK(k >= prev_k); // monotone in x
        prev_k = k;
    }
}

TEST_CASE("empirical cell occupancies match quadrature probabilities") {
    const SourceModel src = SourceModel::gaussian(0, 1);
    const PointDensity d = design_mse_fixed_rate(src);
    const int K = 16;
    const CompandingQuantizer q = build_quantizer(d, K);

    const std::size_t n = 1'000'000;
    std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
    RngStream rng(2718);
    for (std::size_t i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(q.encode(src.sample(rng)) - 1)];
    for (int k = 1; k <= K; ++k) {
        const double p = src.cdf(q.cell_hi(k)) - src.cdf(q.cell_lo(k));
        const double sigma = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
        const double observed = static_cast<double>(counts[static_cast<std::size_t>(k - 1)]);
        CHECK(std::abs(observed - static_cast<double>(n) * p) <= 5.0 * sigma);
    }
}

TEST_CASE("csv serialization spells infinities") {
    const PointDensity d = design_uniform(Interval{0.0, 1.0});
    const CompandingQuantizer q = build_quantizer(d, 4);
    const std::string path = "/tmp/dfsq_test_quantizer.csv";
    q.save_csv(path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("1,-inf,0.25,0.25") != std::string::npos);
    CHECK(text.find("4,0.75,inf,0.75") != std::string::npos);
}
