#pragma once

#include <span>
#include <string>
#include <vector>

#include "dfsq/point_density.hpp"

namespace dfsq {

// A finite-codebook realization of a point density: K cells with boundaries
// at the compressor quantiles k/K, midpoint codewords in the interior and the
// extremal codewords pinned to the outermost boundaries. Cells are indexed
// 1..K (the convention of the quantization literature) and are left-open
// right-closed: cell k is (p_{k-1}, p_k] with p_0 = -inf, p_K = +inf.
class CompandingQuantizer {
public:
    int size() const { return static_cast<int>(codewords_.size()); }
    double rate_bits() const;

    std::span<const double> boundaries() const { return boundaries_; } // K-1
    std::span<const double> codewords() const { return codewords_; }   // K

    // Cell index of x; every real encodes (extremes land in cells 1 and K).
    // NaN is rejected.
    int encode(double x) const;
    double decode(int k) const; // codeword c_k, 1 <= k <= K

    double cell_lo(int k) const; // p_{k-1}, -inf for k = 1
    double cell_hi(int k) const; // p_k, +inf for k = K

    const std::string& density_name() const { return density_name_; }

    // Rows (k, p_{k-1}, p_k, c_k); infinities spelled "-inf"/"inf".
    void save_csv(const std::string& path) const;

private:
    friend CompandingQuantizer build_quantizer(const PointDensity&, int);
    std::vector<double> boundaries_;
    std::vector<double> codewords_;
    std::string density_name_;
};

// Realizes K cells from a density. K >= 3: the extremal codeword rule needs
// distinct first and last boundaries.
CompandingQuantizer build_quantizer(const PointDensity& density, int K);

} // namespace dfsq
