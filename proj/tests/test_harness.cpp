#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dfsq/errors.hpp"
#include "dfsq/harness.hpp"

using namespace dfsq;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.rates_bits = {4.0, 3.0};
    CHECK_THROWS_AS(cfg.validate(), invalid_parameter);
    cfg.rates_bits = {3.0, 4.0};
    cfg.samples = 100;
    CHECK_THROWS_AS(cfg.validate(), invalid_parameter);
    cfg.samples = 10000;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config files are JSON mirroring the experiment config") {
    const auto cfg = parse_config_json(R"({
        "experiment": "custom",
        "rates": [3, 4, 5],
        "samples": 20000,
        "seed": 99,
        "source": {"kind": "exponential", "params": [2.0]},
        "computation": "one_minus_exp_neg",
        "objective": "fmse-fr"
    })");
    CHECK(cfg.experiment == Experiment::custom);
    CHECK(cfg.rates_bits == std::vector<double>{3, 4, 5});
    CHECK(cfg.samples == 20000);
    CHECK(cfg.seed == 99);
    CHECK(cfg.source_kind == "exponential");
    CHECK(cfg.source_params == std::vector<double>{2.0});

    CHECK_THROWS_AS(parse_config_json(R"({"experiment": "nope"})"),
                    invalid_parameter);
    CHECK_THROWS_AS(parse_config_json(R"({"unknown_key": 1})"),
                    invalid_parameter);
    CHECK_THROWS_AS(parse_config_json("not json"), invalid_parameter);
}

TEST_CASE("report emission: cardinality, header-only, determinism") {
    const std::string path = "/tmp/dfsq_test_report.csv";
    SUBCASE("empty row list gives a header-only file") {
        emit_report({}, path);
        const std::string text = slurp(path);
        CHECK(text ==
              "experiment_id,N,K_or_kappa,rate_bits,d_emp,d_emp_stderr,"
              "d_theory,scaled_emp,scaled_theory,seed,samples\n");
    }
    SUBCASE("3 designs x 5 rates gives 15 data rows, byte-identical rerun") {
        std::vector<ReportRow> rows;
        for (int d = 0; d < 3; ++d) {
            for (int r = 0; r < 5; ++r) {
                ReportRow row;
                row.experiment_id = "exp/design" + std::to_string(d);
                row.k_or_kappa = 1 << (r + 2);
                row.rate_bits = r + 2.0;
                row.d_emp = 1e-3 / (d + 1) / (r + 1);
                rows.push_back(row);
            }
        }
        emit_report(rows, path);
        const std::string first = slurp(path);
        CHECK(std::count(first.begin(), first.end(), '\n') == 16);
        emit_report(rows, path);
        CHECK(slurp(path) == first);
    }
}

TEST_CASE("granular search: the uniform source is covered exactly") {
    const SourceModel u01 = SourceModel::uniform(0, 1);
    const auto ident = Computation::builtin(ComputationKind::identity);
    const std::vector<double> ws = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    const GranularSearch gs = best_uniform_granular(u01, ident, 4.0, ws, 40000, 3);
    CHECK(gs.best_halfwidth == 1.0);
    // distortion degrades toward both ends of the grid
    CHECK(gs.curve.front().second > gs.best_distortion);
    CHECK(gs.curve.back().second > gs.best_distortion);
}

TEST_CASE("granular argmin is stable under quadrupled samples") {
    const SourceModel gauss = SourceModel::gaussian(0, 1);
    const auto square = Computation::builtin(ComputationKind::square);
    std::vector<double> ws;
    for (double w = 2.0; w <= 8.0 + 1e-9; w += 0.5) ws.push_back(w);
    const GranularSearch a = best_uniform_granular(gauss, square, 5.0, ws, 50000, 7);
    const GranularSearch b = best_uniform_granular(gauss, square, 5.0, ws, 200000, 7);
    CHECK(std::abs(a.best_halfwidth - b.best_halfwidth) <= 0.5 + 1e-12);
}

TEST_CASE("multi_sum_square with N=1 reduces to gaussian_square") {
    ExperimentConfig uni;
    uni.experiment = Experiment::gaussian_square;
    uni.rates_bits = {4.0, 6.0};
    uni.samples = 20000;
    uni.seed = 77;
    const ExperimentResult a = run_example(uni);

    ExperimentConfig multi = uni;
    multi.experiment = Experiment::multi_sum_square;
    multi.n_sources = 1;
    const ExperimentResult b = run_example(multi);

    auto find = [](const ExperimentResult& res, const std::string& id,
                   double rate) -> const ReportRow& {
        for (const ReportRow& r : res.rows)
            if (r.experiment_id == id && r.rate_bits == rate) return r;
        throw std::runtime_error("row not found: " + id);
    };
    for (double rate : uni.rates_bits) {
        for (const char* design : {"functional", "ordinary"}) {
            const auto& ra =
                find(a, std::string("gaussian_square/") + design, rate);
            const auto& rb =
                find(b, std::string("multi_sum_square/") + design, rate);
            CHECK(ra.d_emp == rb.d_emp); // same seed, same stream, same maths
            CHECK(ra.d_theory == doctest::Approx(rb.d_theory).epsilon(1e-9));
        }
    }
}

TEST_CASE("experiment runs are deterministic end to end") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::custom;
    cfg.source_kind = "exponential";
    cfg.source_params = {1.0};
    cfg.computation = "one_minus_exp_neg";
    cfg.objective = "fmse-fr";
    cfg.rates_bits = {3.0, 5.0};
    cfg.samples = 20000;
    cfg.seed = 11;
    cfg.output_path = "/tmp/dfsq_test_det_a.csv";
    run_example(cfg);
    cfg.output_path = "/tmp/dfsq_test_det_b.csv";
    run_example(cfg);
    CHECK(slurp("/tmp/dfsq_test_det_a.csv") == slurp("/tmp/dfsq_test_det_b.csv"));
}

TEST_CASE("cauchy example: ordinary design reported infeasible, rows still flow") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::cauchy_exp;
    cfg.rates_bits = {3.0, 4.0};
    cfg.samples = 20000;
    cfg.seed = 5;
    const ExperimentResult res = run_example(cfg);
    CHECK(res.summary.find("ordinary design infeasible") != std::string::npos);
    bool has_functional = false, has_ordinary = false;
    for (const ReportRow& r : res.rows) {
        if (r.experiment_id == "cauchy_exp/functional") has_functional = true;
        if (r.experiment_id == "cauchy_exp/ordinary") has_ordinary = true;
    }
    CHECK(has_functional);
    CHECK_FALSE(has_ordinary);
}

TEST_CASE("entropy-constrained custom run reports measured index entropy") {
    SUBCASE("gamma differs from f: entropy strictly below log2 K") {
        ExperimentConfig cfg;
        cfg.experiment = Experiment::custom;
        cfg.source_kind = "gaussian";
        cfg.source_params = {0.0, 1.0};
        cfg.computation = "exp_neg_abs";
        cfg.objective = "fmse-ec";
        cfg.rates_bits = {4.0};
        cfg.samples = 20000;
        cfg.seed = 13;
        const ExperimentResult res = run_example(cfg);
        REQUIRE(res.rows.size() == 1);
        CHECK(res.rows[0].rate_bits < 4.0 - 1e-6);
        CHECK(res.rows[0].rate_bits > 2.0);
        CHECK(res.rows[0].d_theory > 0.0);
    }
    SUBCASE("gamma proportional to f: cells come out exactly equiprobable") {
        // exponential(1) with g = 1 - e^{-x} has γ = e^{-x} = f, so the
        // entropy-constrained design's cells are equiprobable and the
        // measured index entropy equals log2 K.
        ExperimentConfig cfg;
        cfg.experiment = Experiment::custom;
        cfg.source_kind = "exponential";
        cfg.source_params = {1.0};
        cfg.computation = "one_minus_exp_neg";
        cfg.objective = "fmse-ec";
        cfg.rates_bits = {4.0};
        cfg.samples = 20000;
        cfg.seed = 13;
        const ExperimentResult res = run_example(cfg);
        REQUIRE(res.rows.size() == 1);
        CHECK(res.rows[0].rate_bits == doctest::Approx(4.0).epsilon(1e-6));
    }
}

TEST_CASE("decoder-gap experiment writes its sweep schema") {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::decoder_gap;
    cfg.rates_bits = {2.0, 3.0, 4.0};
    cfg.samples = 30000;
    cfg.seed = 19;
    cfg.output_path = "/tmp/dfsq_test_gap.csv";
    const ExperimentResult res = run_example(cfg);
    CHECK(res.summary.find("rel_excess") != std::string::npos);
    const std::string text = slurp(cfg.output_path);
    CHECK(text.find("rate_bits,d_simple,d_mmse,d_fmmse,rel_excess,"
                    "rel_excess_stderr") != std::string::npos);
}
