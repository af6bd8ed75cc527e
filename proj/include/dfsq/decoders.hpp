#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dfsq/computation.hpp"
#include "dfsq/point_density.hpp"
#include "dfsq/quantizer.hpp"
#include "dfsq/source_model.hpp"

namespace dfsq {

// The three univariate decoders. `simple` applies g to the midpoint
// codeword and needs no tables; `mmse` applies g to the cell centroid
// E[X | cell]; `fmmse` reconstructs E[g(X) | cell], the per-cell optimum.
enum class DecoderKind { simple, mmse, fmmse };

class Decoder {
public:
    DecoderKind kind() const { return kind_; }
    int cells() const { return static_cast<int>(estimates_.size()); }

    // Estimate of g for cell k (1-based).
    double estimate(int k) const;
    // A flagged cell fell back to the simple value (zero mass under the
    // source, or a non-convergent overload quadrature).
    bool flagged(int k) const;
    // Source mass beyond the quadrature truncation points, part of the table
    // error budget.
    double truncation_residual() const { return truncation_residual_; }

private:
    friend Decoder build_decoder(DecoderKind, const SourceModel&,
                                 const Computation&, const CompandingQuantizer&);
    DecoderKind kind_ = DecoderKind::simple;
    std::vector<double> estimates_;
    std::vector<char> flags_;
    double truncation_residual_ = 0.0;
};

// Tables by per-cell quadrature of x·f (mmse) or g·f (fmmse), normalized by
// the cell mass. Overload cells are integrated to the points where residual
// source mass drops below 1e-13 per tail.
Decoder build_decoder(DecoderKind kind, const SourceModel& src,
                      const Computation& g, const CompandingQuantizer& q);

struct ExcessRow {
    double rate_bits = 0.0;
    int codebook = 0;
    double d_simple = 0.0, d_mmse = 0.0, d_fmmse = 0.0;
    double rel_excess = 0.0;        // (D_simple - D_fmmse) / D_fmmse
    double rel_excess_stderr = 0.0; // delta method under common random numbers
};

struct ExcessSweep {
    std::vector<ExcessRow> rows;
    // Least-squares fit of log(rel_excess) against rate, restricted to rows
    // with rel_excess > 10× its standard error (below that the log is noise).
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
    int points_in_fit = 0;

    void save_csv(const std::string& path) const;
};

// Runs the three decoders on one common random-number stream per rate and
// reports the relative excess fMSE of the simple decoder over the per-cell
// optimum. A negative excess beyond 4σ throws internal_inconsistency: the
// fMMSE table is per-cell optimal, so that cannot happen honestly.
ExcessSweep excess_fmse_sweep(const SourceModel& src, const Computation& g,
                              const PointDensity& design,
                              std::span<const double> rates_bits,
                              std::size_t samples, std::uint64_t seed);

} // namespace dfsq
