#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dfsq/computation.hpp"
#include "dfsq/decoders.hpp"
#include "dfsq/distortion.hpp"
#include "dfsq/point_density.hpp"
#include "dfsq/source_model.hpp"

namespace dfsq {

enum class Experiment {
    gaussian_square,  // N(0,1), g = x²: uniform/ordinary/functional + compute-first
    cauchy_exp,       // Cauchy, g = e^{-|x|}
    multi_sum_square, // N iid N(0,1), g = Σ x²
    multi_min,        // N iid exponential(1), g = min
    decoder_gap,      // exponential, g = 1 - e^{-x}: simple vs mmse vs fmmse
    custom,           // one (source, computation, objective) triple
};

struct ExperimentConfig {
    Experiment experiment = Experiment::gaussian_square;
    std::vector<double> rates_bits = {2, 3, 4, 5, 6, 7, 8};
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 20120521;
    int n_sources = 0; // 0: experiment default (1, or 10 for multi_min)
    std::string output_path;

    // custom experiment
    std::string source_kind = "gaussian";
    std::vector<double> source_params = {0.0, 1.0};
    std::string computation = "square";
    std::string objective = "fmse-fr"; // fmse-fr | mse-fr | fmse-ec | uniform

    void validate() const; // increasing rates, samples >= 1e4
};

Experiment experiment_from_string(const std::string& s);
std::string to_string(Experiment e);

// One CSV row of the distortion-report contract.
struct ReportRow {
    std::string experiment_id; // "<experiment>/<design>"
    int n_sources = 1;
    double k_or_kappa = 0.0; // K, or κ = Σ K_n
    double rate_bits = 0.0;  // per-source rate
    double d_emp = 0.0;
    double d_emp_stderr = 0.0;
    double d_theory = 0.0; // NaN when no limit applies
    double scaled_emp = 0.0;
    double scaled_theory = 0.0;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
};

struct ExperimentResult {
    std::vector<ReportRow> rows;
    std::string summary;
};

// Reproduces one of the named experiments over the configured rate grid:
// builds the uniform (best granular region), ordinary and functional designs,
// runs the simple-decoder Monte Carlo under common random numbers, and
// attaches the asymptotic predictions. Writes CSV + summary when
// config.output_path is set.
ExperimentResult run_example(const ExperimentConfig& config);

struct GranularSearch {
    double best_halfwidth = 0.0;
    double best_distortion = 0.0;
    std::vector<std::pair<double, double>> curve; // (halfwidth, fMSE)
};

// Brute-force search over the granular halfwidth of a uniform design. The
// interval is [lo, lo+w] for sources bounded below, else [median-w, median+w].
GranularSearch best_uniform_granular(const SourceModel& src,
                                     const Computation& g, double rate_bits,
                                     std::span<const double> halfwidths,
                                     std::size_t samples, std::uint64_t seed);

Interval granular_interval(const SourceModel& src, double halfwidth);

// Writes the CSV contract (header + one row per ReportRow, sorted by
// experiment_id then rate) and a scaled-distortion summary table alongside.
// Identical rows produce byte-identical files.
void emit_report(std::span<const ReportRow> rows, const std::string& path);
std::string summary_table(std::span<const ReportRow> rows);

// Config files are JSON mirroring ExperimentConfig; unknown keys rejected.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);

} // namespace dfsq
