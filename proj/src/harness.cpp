#include "dfsq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dfsq/errors.hpp"
#include "dfsq/sensitivity.hpp"

namespace dfsq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int codebook_for_rate(double rate_bits) {
    return std::max(3, static_cast<int>(std::lround(std::exp2(rate_bits))));
}

std::string fmt17(double v) {
    char buf[40];
    if (std::isnan(v)) return "nan";
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[40];
    if (std::isnan(v)) return "-";
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// A (source, computation, per-rate designs) triple measured by the runner.
// Theory constants are per rate: d_theory = constant / K².
struct Variant {
    Variant(std::string l, SourceModel s, Computation c)
        : label(std::move(l)), src(std::move(s)), g(std::move(c)) {}
    std::string label;
    SourceModel src;
    Computation g;
    std::vector<PointDensity> densities; // one per rate
    std::vector<double> theory;          // limit constant per rate (NaN ok)
};

std::vector<double> default_halfwidths(const SourceModel& src) {
    std::vector<double> ws;
    if (src.kind() == SourceKind::cauchy) {
        for (double w = 1.0; w <= 300.0; w *= 1.4142135623730951)
            ws.push_back(w);
    } else {
        for (double w = 0.25; w <= 12.0 + 1e-9; w += 0.25) ws.push_back(w);
    }
    return ws;
}

// Per-rate best-granular uniform densities plus their granular-term theory
// constants.
void append_uniform_variant(std::vector<Variant>& variants,
                            const SourceModel& src, const Computation& g,
                            const SensitivityProfile& gamma,
                            std::span<const double> rates,
                            std::size_t search_samples, std::uint64_t seed) {
    Variant v("uniform", src, g);
    const auto ws = default_halfwidths(src);
    for (double rate : rates) {
        const GranularSearch gs =
            best_uniform_granular(src, g, rate, ws, search_samples, seed);
        PointDensity d = PointDensity::uniform(
            granular_interval(src, gs.best_halfwidth));
        double L = kNaN;
        try {
            L = theory_univariate_limit(src, gamma, d);
        } catch (const theory_undefined&) {
        }
        v.densities.push_back(std::move(d));
        v.theory.push_back(L);
    }
    variants.push_back(std::move(v));
}

std::vector<ReportRow> run_variants(const std::string& experiment_name,
                                    std::span<const Variant> variants,
                                    std::span<const double> rates,
                                    std::size_t samples, std::uint64_t seed) {
    std::vector<ReportRow> rows;
    for (const Variant& v : variants) {
        const ProductSource ps({v.src});
        for (std::size_t ri = 0; ri < rates.size(); ++ri) {
            const int K = codebook_for_rate(rates[ri]);
            const CompandingQuantizer q = build_quantizer(v.densities[ri], K);
            // Substream keyed by rate only: every design at a given rate sees
            // the same source realizations (common random numbers).
            const McEstimate est =
                empirical_fmse(ps, v.g, std::span(&q, 1), samples,
                               RngStream::substream(seed, ri).next_u64());
            ReportRow row;
            row.experiment_id = experiment_name + "/" + v.label;
            row.n_sources = 1;
            row.k_or_kappa = K;
            row.rate_bits = std::log2(static_cast<double>(K));
            row.d_emp = est.mean;
            row.d_emp_stderr = est.std_error;
            const double L = v.theory[ri];
            row.d_theory = std::isnan(L) ? kNaN : L / (double(K) * double(K));
            const double scale = std::exp2(2.0 * row.rate_bits);
            row.scaled_emp = scale * row.d_emp;
            row.scaled_theory = std::isnan(L) ? kNaN : scale * row.d_theory;
            row.seed = seed;
            row.samples = samples;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

ExperimentResult run_univariate_suite(const std::string& name,
                                      const SourceModel& src,
                                      const Computation& g,
                                      const SensitivityProfile& gamma,
                                      bool with_compute_first,
                                      const ExperimentConfig& cfg) {
    std::vector<Variant> variants;
    std::ostringstream notes;
    const std::size_t search_samples =
        std::max<std::size_t>(10000, cfg.samples / 10);

    {
        Variant fun("functional", src, g);
        PointDensity d = design_fmse_fixed_rate(src, gamma);
        const double L = theory_univariate_limit(src, gamma, d);
        for (std::size_t i = 0; i < cfg.rates_bits.size(); ++i) {
            fun.densities.push_back(d);
            fun.theory.push_back(L);
        }
        variants.push_back(std::move(fun));
    }
    try {
        Variant ord("ordinary", src, g);
        PointDensity d = design_mse_fixed_rate(src);
        const double L = theory_univariate_limit(src, gamma, d);
        for (std::size_t i = 0; i < cfg.rates_bits.size(); ++i) {
            ord.densities.push_back(d);
            ord.theory.push_back(L);
        }
        variants.push_back(std::move(ord));
    } catch (const design_infeasible& e) {
        notes << "ordinary design infeasible: " << e.what() << "\n";
    } catch (const theory_undefined& e) {
        notes << "ordinary design has no finite limit: " << e.what() << "\n";
    }
    append_uniform_variant(variants, src, g, gamma, cfg.rates_bits,
                           search_samples, cfg.seed);
    if (with_compute_first) {
        // Quantize Y = g(X) directly with its own MSE-optimal design; the
        // measured error is then plain MSE on Y.
        Variant cf("compute_first", SourceModel::squared(src),
                   Computation::builtin(ComputationKind::identity));
        PointDensity d = design_mse_fixed_rate(cf.src);
        const SensitivityProfile unit =
            univariate_sensitivity(cf.g); // identically 1
        const double L = theory_univariate_limit(cf.src, unit, d);
        for (std::size_t i = 0; i < cfg.rates_bits.size(); ++i) {
            cf.densities.push_back(d);
            cf.theory.push_back(L);
        }
        variants.push_back(std::move(cf));
    }

    ExperimentResult res;
    res.rows =
        run_variants(name, variants, cfg.rates_bits, cfg.samples, cfg.seed);
    res.summary = notes.str() + summary_table(res.rows);
    return res;
}

ExperimentResult run_multivariate_suite(const std::string& name,
                                        const SourceModel& marginal,
                                        const Computation& g,
                                        const SensitivityProfile& gamma_n,
                                        int n, const ExperimentConfig& cfg) {
    std::ostringstream notes;
    const ProductSource srcs = ProductSource::iid(marginal, n);
    const std::size_t search_samples =
        std::max<std::size_t>(10000, cfg.samples / 10);

    struct MultiVariant {
        std::string label;
        std::vector<PointDensity> densities; // per rate (shared across sources)
        std::vector<double> theory;          // κ² constant per rate
    };
    std::vector<MultiVariant> variants;

    auto fixed_design_variant = [&](const std::string& label,
                                    PointDensity d) {
        MultiVariant v;
        v.label = label;
        const RateAllocation alloc = equal_allocation(n, 1.0);
        std::vector<SensitivityProfile> gs(static_cast<std::size_t>(n), gamma_n);
        std::vector<PointDensity> ds(static_cast<std::size_t>(n), d);
        const double c = theory_multivariate_limit(srcs, gs, ds, alloc).constant;
        for (std::size_t i = 0; i < cfg.rates_bits.size(); ++i) {
            v.densities.push_back(d);
            v.theory.push_back(c);
        }
        variants.push_back(std::move(v));
    };

    fixed_design_variant("functional", design_fmse_fixed_rate(marginal, gamma_n));
    try {
        fixed_design_variant("ordinary", design_mse_fixed_rate(marginal));
    } catch (const design_infeasible& e) {
        notes << "ordinary design infeasible: " << e.what() << "\n";
    } catch (const theory_undefined& e) {
        notes << "ordinary design has no finite limit: " << e.what() << "\n";
    }
    {
        // Best uniform granular region, searched on the multivariate fMSE.
        MultiVariant v;
        v.label = "uniform";
        const auto ws = default_halfwidths(marginal);
        const RateAllocation alloc = equal_allocation(n, 1.0);
        std::vector<SensitivityProfile> gs(static_cast<std::size_t>(n), gamma_n);
        for (double rate : cfg.rates_bits) {
            const int K = codebook_for_rate(rate);
            double best_w = ws.front();
            double best_d = std::numeric_limits<double>::infinity();
            for (double w : ws) {
                PointDensity d =
                    PointDensity::uniform(granular_interval(marginal, w));
                std::vector<CompandingQuantizer> qs(
                    static_cast<std::size_t>(n), build_quantizer(d, K));
                const McEstimate est = empirical_fmse(
                    srcs, g, qs, search_samples,
                    RngStream::substream(cfg.seed ^ 0x5eacbeef, K).next_u64());
                if (est.mean < best_d) {
                    best_d = est.mean;
                    best_w = w;
                }
            }
            PointDensity d =
                PointDensity::uniform(granular_interval(marginal, best_w));
            double c = kNaN;
            try {
                std::vector<PointDensity> ds(static_cast<std::size_t>(n), d);
                c = theory_multivariate_limit(srcs, gs, ds, alloc).constant;
            } catch (const theory_undefined&) {
            }
            v.densities.push_back(std::move(d));
            v.theory.push_back(c);
        }
        variants.push_back(std::move(v));
    }

    ExperimentResult res;
    for (const MultiVariant& v : variants) {
        for (std::size_t ri = 0; ri < cfg.rates_bits.size(); ++ri) {
            const int K = codebook_for_rate(cfg.rates_bits[ri]);
            std::vector<CompandingQuantizer> qs(
                static_cast<std::size_t>(n),
                build_quantizer(v.densities[ri], K));
            const McEstimate est =
                empirical_fmse(srcs, g, qs, cfg.samples,
                               RngStream::substream(cfg.seed, ri).next_u64());
            const double kappa = static_cast<double>(n) * K;
            ReportRow row;
            row.experiment_id = name + "/" + v.label;
            row.n_sources = n;
            row.k_or_kappa = kappa;
            row.rate_bits = std::log2(static_cast<double>(K));
            row.d_emp = est.mean;
            row.d_emp_stderr = est.std_error;
            row.d_theory = std::isnan(v.theory[ri])
                               ? kNaN
                               : v.theory[ri] / (kappa * kappa);
            const double scale = std::exp2(2.0 * row.rate_bits);
            row.scaled_emp = scale * row.d_emp;
            row.scaled_theory = scale * row.d_theory;
            row.seed = cfg.seed;
            row.samples = cfg.samples;
            res.rows.push_back(std::move(row));
        }
    }
    res.summary = notes.str() + summary_table(res.rows);
    return res;
}

ExperimentResult run_decoder_gap(const ExperimentConfig& cfg) {
    const SourceModel src = SourceModel::exponential(1.0);
    const Computation g =
        Computation::builtin(ComputationKind::one_minus_exp_neg);
    const SensitivityProfile gamma = univariate_sensitivity(g);
    const PointDensity design = design_fmse_fixed_rate(src, gamma);
    const ExcessSweep sweep = excess_fmse_sweep(
        src, g, design, cfg.rates_bits, cfg.samples, cfg.seed);

    ExperimentResult res;
    std::ostringstream s;
    s << "decoder gap: exponential source, g = 1-e^{-x}, functional design\n";
    s << "  fit of log(rel_excess) vs rate: slope " << fmt4(sweep.slope)
      << ", r^2 " << fmt4(sweep.r_squared) << " (" << sweep.points_in_fit
      << " points)\n";
    for (const ExcessRow& r : sweep.rows) {
        s << "  R=" << r.rate_bits << "  d_simple=" << fmt4(r.d_simple)
          << "  d_mmse=" << fmt4(r.d_mmse) << "  d_fmmse=" << fmt4(r.d_fmmse)
          << "  rel_excess=" << fmt4(r.rel_excess) << " +- "
          << fmt4(r.rel_excess_stderr) << "\n";
    }
    res.summary = s.str();
    if (!cfg.output_path.empty()) sweep.save_csv(cfg.output_path);
    return res;
}

ExperimentResult run_custom(const ExperimentConfig& cfg) {
    const SourceModel src = make_source(
        source_kind_from_string(cfg.source_kind), cfg.source_params);
    const Computation g =
        Computation::builtin(computation_kind_from_string(cfg.computation));
    const SensitivityProfile gamma = univariate_sensitivity(g);

    std::vector<Variant> variants;
    if (cfg.objective == "uniform") {
        append_uniform_variant(variants, src, g, gamma, cfg.rates_bits,
                               std::max<std::size_t>(10000, cfg.samples / 10),
                               cfg.seed);
    } else {
        Variant v(cfg.objective, src, g);
        PointDensity d = [&] {
            if (cfg.objective == "fmse-fr")
                return design_fmse_fixed_rate(src, gamma);
            if (cfg.objective == "mse-fr") return design_mse_fixed_rate(src);
            if (cfg.objective == "fmse-ec")
                return design_fmse_entropy_constrained(gamma, src.support());
            throw invalid_parameter("unknown objective: " + cfg.objective);
        }();
        double L = kNaN;
        try {
            L = theory_univariate_limit(src, gamma, d);
        } catch (const theory_undefined&) {
        }
        for (std::size_t i = 0; i < cfg.rates_bits.size(); ++i) {
            v.densities.push_back(d);
            v.theory.push_back(L);
        }
        variants.push_back(std::move(v));
    }

    ExperimentResult res = [&] {
        ExperimentResult r;
        r.rows = run_variants("custom", variants, cfg.rates_bits, cfg.samples,
                              cfg.seed);
        return r;
    }();

    // Entropy-constrained designs report the measured codeword-index entropy
    // as the rate coordinate (no entropy coder is built).
    if (cfg.objective == "fmse-ec") {
        const RateCurve ec = theory_entropy_constrained_optimal(src, gamma);
        for (std::size_t ri = 0; ri < res.rows.size(); ++ri) {
            ReportRow& row = res.rows[ri];
            const int K = static_cast<int>(row.k_or_kappa);
            const CompandingQuantizer q =
                build_quantizer(variants[0].densities[ri], K);
            row.rate_bits = index_entropy_bits(src, q);
            row.d_theory = ec.at(row.rate_bits);
            const double scale = std::exp2(2.0 * row.rate_bits);
            row.scaled_emp = scale * row.d_emp;
            row.scaled_theory = scale * row.d_theory;
        }
    }
    res.summary = summary_table(res.rows);
    return res;
}

} // namespace

void ExperimentConfig::validate() const {
    if (rates_bits.empty())
        throw invalid_parameter("config: empty rate grid");
    for (std::size_t i = 1; i < rates_bits.size(); ++i)
        if (!(rates_bits[i] > rates_bits[i - 1]))
            throw invalid_parameter("config: rate grid must be increasing");
    if (samples < 10000)
        throw invalid_parameter("config: samples must be >= 1e4");
    if (n_sources < 0)
        throw invalid_parameter("config: n_sources must be >= 0");
}

Experiment experiment_from_string(const std::string& s) {
    if (s == "gaussian_square") return Experiment::gaussian_square;
    if (s == "cauchy_exp") return Experiment::cauchy_exp;
    if (s == "multi_sum_square") return Experiment::multi_sum_square;
    if (s == "multi_min") return Experiment::multi_min;
    if (s == "decoder_gap" || s == "decoder-gap") return Experiment::decoder_gap;
    if (s == "custom") return Experiment::custom;
    throw invalid_parameter("unknown experiment: " + s);
}

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::gaussian_square: return "gaussian_square";
        case Experiment::cauchy_exp: return "cauchy_exp";
        case Experiment::multi_sum_square: return "multi_sum_square";
        case Experiment::multi_min: return "multi_min";
        case Experiment::decoder_gap: return "decoder_gap";
        case Experiment::custom: return "custom";
    }
    return "?";
}

ExperimentResult run_example(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult res;
    switch (config.experiment) {
        case Experiment::gaussian_square: {
            const SourceModel src = SourceModel::gaussian(0.0, 1.0);
            const Computation g = Computation::builtin(ComputationKind::square);
            res = run_univariate_suite("gaussian_square", src, g,
                                       univariate_sensitivity(g), true, config);
            break;
        }
        case Experiment::cauchy_exp: {
            const SourceModel src = SourceModel::cauchy(0.0, 1.0);
            const Computation g =
                Computation::builtin(ComputationKind::exp_neg_abs);
            res = run_univariate_suite("cauchy_exp", src, g,
                                       univariate_sensitivity(g), false, config);
            break;
        }
        case Experiment::multi_sum_square: {
            const int n = config.n_sources > 0 ? config.n_sources : 2;
            const SourceModel src = SourceModel::gaussian(0.0, 1.0);
            const Computation g = Computation::builtin(
                ComputationKind::separable_sum_of_squares, n);
            // Separable: the per-coordinate profile is the univariate one.
            const SensitivityProfile gamma = univariate_sensitivity(
                Computation::builtin(ComputationKind::square));
            res = run_multivariate_suite("multi_sum_square", src, g, gamma, n,
                                         config);
            break;
        }
        case Experiment::multi_min: {
            const int n = config.n_sources > 0 ? config.n_sources : 10;
            const SourceModel src = SourceModel::exponential(1.0);
            const Computation g =
                Computation::builtin(ComputationKind::min_of_n, n);
            res = run_multivariate_suite("multi_min", src, g,
                                         min_exponential_sensitivity(n, 1.0), n,
                                         config);
            break;
        }
        case Experiment::decoder_gap:
            return run_decoder_gap(config); // writes its own CSV schema
        case Experiment::custom:
            res = run_custom(config);
            break;
    }
    if (!config.output_path.empty()) emit_report(res.rows, config.output_path);
    return res;
}

Interval granular_interval(const SourceModel& src, double halfwidth) {
    if (!(halfwidth > 0.0))
        throw invalid_parameter("granular_interval: halfwidth must be > 0");
    // No clamping to the support: an interval wider than the source wastes
    // cells on empty regions, which is exactly what the search must see.
    const Interval sup = src.support();
    if (sup.lo_finite()) return {sup.lo, sup.lo + halfwidth};
    if (sup.hi_finite()) return {sup.hi - halfwidth, sup.hi};
    return {src.median() - halfwidth, src.median() + halfwidth};
}

GranularSearch best_uniform_granular(const SourceModel& src,
                                     const Computation& g, double rate_bits,
                                     std::span<const double> halfwidths,
                                     std::size_t samples, std::uint64_t seed) {
    if (halfwidths.empty())
        throw invalid_parameter("best_uniform_granular: empty grid");
    for (std::size_t i = 1; i < halfwidths.size(); ++i)
        if (!(halfwidths[i] > halfwidths[i - 1]))
            throw invalid_parameter(
                "best_uniform_granular: grid must be increasing");

    const int K = codebook_for_rate(rate_bits);
    const ProductSource ps({src});
    GranularSearch out;
    out.best_distortion = std::numeric_limits<double>::infinity();
    for (double w : halfwidths) {
        const Interval iv = granular_interval(src, w);
        if (iv.empty()) continue;
        const PointDensity d = PointDensity::uniform(iv);
        const CompandingQuantizer q = build_quantizer(d, K);
        // Same substream for every halfwidth: the argmin is compared on
        // common random numbers.
        const McEstimate est =
            empirical_fmse(ps, g, std::span(&q, 1), samples,
                           RngStream::substream(seed, 0x9a7).next_u64());
        out.curve.emplace_back(w, est.mean);
        if (est.mean < out.best_distortion) {
            out.best_distortion = est.mean;
            out.best_halfwidth = w;
        }
    }
    if (out.curve.empty())
        throw invalid_parameter("best_uniform_granular: no feasible halfwidth");
    return out;
}

std::string summary_table(std::span<const ReportRow> rows) {
    std::ostringstream s;
    s << "experiment_id                     N     K/kappa  R_bits   "
         "2^2R*d_emp    2^2R*d_theory\n";
    for (const ReportRow& r : rows) {
        char line[200];
        std::snprintf(line, sizeof line, "%-32s %3d %10.6g %7.4g %13.6g %13.6g\n",
                      r.experiment_id.c_str(), r.n_sources, r.k_or_kappa,
                      r.rate_bits, r.scaled_emp, r.scaled_theory);
        s << line;
    }
    return s.str();
}

void emit_report(std::span<const ReportRow> rows, const std::string& path) {
    std::vector<ReportRow> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const ReportRow& a, const ReportRow& b) {
                  if (a.experiment_id != b.experiment_id)
                      return a.experiment_id < b.experiment_id;
                  if (a.rate_bits != b.rate_bits) return a.rate_bits < b.rate_bits;
                  return a.k_or_kappa < b.k_or_kappa;
              });
    std::ofstream out(path);
    if (!out) throw error("cannot write " + path);
    out << "experiment_id,N,K_or_kappa,rate_bits,d_emp,d_emp_stderr,d_theory,"
           "scaled_emp,scaled_theory,seed,samples\n";
    for (const ReportRow& r : sorted) {
        out << r.experiment_id << ',' << r.n_sources << ','
            << fmt17(r.k_or_kappa) << ',' << fmt17(r.rate_bits) << ','
            << fmt17(r.d_emp) << ',' << fmt17(r.d_emp_stderr) << ','
            << fmt17(r.d_theory) << ',' << fmt17(r.scaled_emp) << ','
            << fmt17(r.scaled_theory) << ',' << r.seed << ',' << r.samples
            << '\n';
    }
}

ExperimentConfig parse_config_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw invalid_parameter(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "experiment")
            cfg.experiment = experiment_from_string(value.get<std::string>());
        else if (key == "rates")
            cfg.rates_bits = value.get<std::vector<double>>();
        else if (key == "samples")
            cfg.samples = value.get<std::size_t>();
        else if (key == "seed")
            cfg.seed = value.get<std::uint64_t>();
        else if (key == "n")
            cfg.n_sources = value.get<int>();
        else if (key == "out")
            cfg.output_path = value.get<std::string>();
        else if (key == "source") {
            cfg.source_kind = value.at("kind").get<std::string>();
            if (value.contains("params"))
                cfg.source_params = value.at("params").get<std::vector<double>>();
        } else if (key == "computation")
            cfg.computation = value.get<std::string>();
        else if (key == "objective")
            cfg.objective = value.get<std::string>();
        else
            throw invalid_parameter("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

} // namespace dfsq
