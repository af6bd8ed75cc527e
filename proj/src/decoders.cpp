#include "dfsq/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dfsq/errors.hpp"
#include "dfsq/quadrature.hpp"
#include "dfsq/rng.hpp"

namespace dfsq {

double Decoder::estimate(int k) const {
    if (k < 1 || k > cells())
        throw invalid_input("decoder: cell index out of range");
    return estimates_[static_cast<std::size_t>(k - 1)];
}

bool Decoder::flagged(int k) const {
    if (k < 1 || k > cells())
        throw invalid_input("decoder: cell index out of range");
    return flags_[static_cast<std::size_t>(k - 1)] != 0;
}

Decoder build_decoder(DecoderKind kind, const SourceModel& src,
                      const Computation& g, const CompandingQuantizer& q) {
    if (g.arity() != 1 || g.output_dim() != 1)
        throw invalid_parameter("build_decoder: univariate scalar g only");

    Decoder dec;
    dec.kind_ = kind;
    const int K = q.size();
    dec.estimates_.resize(static_cast<std::size_t>(K));
    dec.flags_.assign(static_cast<std::size_t>(K), 0);

    if (kind == DecoderKind::simple) {
        for (int k = 1; k <= K; ++k)
            dec.estimates_[static_cast<std::size_t>(k - 1)] =
                g.eval1(q.decode(k));
        return dec;
    }

    // Quadrature truncation for the overload cells: keep all but 1e-13 of the
    // source mass per tail and book the remainder as table error.
    const Interval sup = src.support();
    const double trunc_lo =
        sup.lo_finite() ? sup.lo : src.inv_cdf(1e-13);
    const double trunc_hi =
        sup.hi_finite() ? sup.hi : src.inv_cdf(1.0 - 1e-13);
    dec.truncation_residual_ =
        (sup.lo_finite() ? 0.0 : 1e-13) + (sup.hi_finite() ? 0.0 : 1e-13);

    quad::Options opts;
    opts.rel_tol = 1e-10;

    for (int k = 1; k <= K; ++k) {
        const double lo = std::max(q.cell_lo(k), trunc_lo);
        const double hi = std::min(q.cell_hi(k), trunc_hi);
        const double simple_value = g.eval1(q.decode(k));
        double& slot = dec.estimates_[static_cast<std::size_t>(k - 1)];
        slot = simple_value;

        if (!(hi > lo)) { // cell entirely outside the (truncated) support
            dec.flags_[static_cast<std::size_t>(k - 1)] = 1;
            continue;
        }
        const double mass = src.cdf(hi) - src.cdf(lo);
        if (!(mass > 1e-300)) {
            dec.flags_[static_cast<std::size_t>(k - 1)] = 1;
            continue;
        }
        auto weighted = [&](double x) {
            const double w = kind == DecoderKind::mmse ? x : g.eval1(x);
            return w * src.pdf(x);
        };
        auto r = quad::integrate(weighted, lo, hi, opts);
        if (!r.converged) { // divergent overload moment: tail condition broken
            dec.flags_[static_cast<std::size_t>(k - 1)] = 1;
            continue;
        }
        const double cond_mean = r.value / mass;
        slot = kind == DecoderKind::mmse ? g.eval1(cond_mean) : cond_mean;
    }
    return dec;
}

namespace {

struct PairStats {
    // pairwise moments of per-sample squared errors (a = candidate, b = fmmse)
    double sum_a = 0.0, sum_b = 0.0;
    double sum_aa = 0.0, sum_bb = 0.0, sum_ab = 0.0;

    void add(double a, double b) {
        sum_a += a;
        sum_b += b;
        sum_aa += a * a;
        sum_bb += b * b;
        sum_ab += a * b;
    }
};

// (mean_a/mean_b - 1) with a delta-method standard error; under common random
// numbers the covariance term removes nearly all of the shared noise.
void ratio_excess(const PairStats& s, double n, double& rel, double& se) {
    const double ma = s.sum_a / n, mb = s.sum_b / n;
    rel = ma / mb - 1.0;
    const double var_a = std::max(0.0, s.sum_aa / n - ma * ma);
    const double var_b = std::max(0.0, s.sum_bb / n - mb * mb);
    const double cov = s.sum_ab / n - ma * mb;
    const double ratio = ma / mb;
    const double var_ratio =
        (var_a + ratio * ratio * var_b - 2.0 * ratio * cov) / (n * mb * mb);
    se = std::sqrt(std::max(0.0, var_ratio));
}

} // namespace

ExcessSweep excess_fmse_sweep(const SourceModel& src, const Computation& g,
                              const PointDensity& design,
                              std::span<const double> rates_bits,
                              std::size_t samples, std::uint64_t seed) {
    if (g.arity() != 1 || g.output_dim() != 1)
        throw invalid_parameter("excess_fmse_sweep: univariate scalar g only");
    if (samples < 10000)
        throw invalid_parameter("excess_fmse_sweep: samples must be >= 1e4");
    for (double r : rates_bits)
        if (!(r >= 2.0))
            throw invalid_parameter("excess_fmse_sweep: rates must be >= 2 bits");

    ExcessSweep sweep;
    constexpr std::size_t kBlock = 1 << 16;

    for (std::size_t ridx = 0; ridx < rates_bits.size(); ++ridx) {
        const double rate = rates_bits[ridx];
        const int K = std::max(3, static_cast<int>(std::lround(std::exp2(rate))));
        const CompandingQuantizer q = build_quantizer(design, K);
        const Decoder dec_s = build_decoder(DecoderKind::simple, src, g, q);
        const Decoder dec_m = build_decoder(DecoderKind::mmse, src, g, q);
        const Decoder dec_f = build_decoder(DecoderKind::fmmse, src, g, q);

        PairStats sf, mf;
        std::size_t done = 0;
        for (std::uint64_t block = 0; done < samples; ++block) {
            // One stream drives all three decoders: the seed is keyed only by
            // the rate index, so design comparisons at a rate share samples.
            RngStream rng =
                RngStream::substream(seed, (ridx << 20) ^ block);
            const std::size_t count = std::min(kBlock, samples - done);
            for (std::size_t i = 0; i < count; ++i) {
                const double x = src.sample(rng);
                const double gx = g.eval1(x);
                const int k = q.encode(x);
                const double es = gx - dec_s.estimate(k);
                const double em = gx - dec_m.estimate(k);
                const double ef = gx - dec_f.estimate(k);
                sf.add(es * es, ef * ef);
                mf.add(em * em, ef * ef);
            }
            done += count;
        }

        const double n = static_cast<double>(samples);
        ExcessRow row;
        row.rate_bits = rate;
        row.codebook = K;
        row.d_simple = sf.sum_a / n;
        row.d_mmse = mf.sum_a / n;
        row.d_fmmse = sf.sum_b / n;
        ratio_excess(sf, n, row.rel_excess, row.rel_excess_stderr);
        if (row.rel_excess < -4.0 * row.rel_excess_stderr)
            throw internal_inconsistency(
                "excess_fmse_sweep: simple decoder beat the per-cell optimum "
                "beyond noise");
        sweep.rows.push_back(row);
    }

    // Log-linear fit of the relative excess against rate.
    std::vector<double> xs, ys;
    for (const ExcessRow& row : sweep.rows) {
        if (row.rel_excess > 10.0 * row.rel_excess_stderr) {
            xs.push_back(row.rate_bits);
            ys.push_back(std::log(row.rel_excess));
        }
    }
    sweep.points_in_fit = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        const double n = static_cast<double>(xs.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
            syy += ys[i] * ys[i];
        }
        const double denom = n * sxx - sx * sx;
        sweep.slope = (n * sxy - sx * sy) / denom;
        sweep.intercept = (sy - sweep.slope * sx) / n;
        double ss_res = 0.0, ss_tot = 0.0;
        const double ybar = sy / n;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double fit = sweep.intercept + sweep.slope * xs[i];
            ss_res += (ys[i] - fit) * (ys[i] - fit);
            ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
        }
        sweep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    return sweep;
}

void ExcessSweep::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw error("cannot write " + path);
    out << "# log(rel_excess) vs rate: slope " << slope << ", intercept "
        << intercept << ", r^2 " << r_squared << ", points " << points_in_fit
        << "\n";
    out << "rate_bits,d_simple,d_mmse,d_fmmse,rel_excess,rel_excess_stderr\n";
    char buf[200];
    for (const ExcessRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.rate_bits, r.d_simple, r.d_mmse, r.d_fmmse,
                      r.rel_excess, r.rel_excess_stderr);
        out << buf;
    }
}

} // namespace dfsq
