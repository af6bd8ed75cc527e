#include "dfsq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dfsq/errors.hpp"

namespace dfsq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double CompandingQuantizer::rate_bits() const {
    return std::log2(static_cast<double>(size()));
}

int CompandingQuantizer::encode(double x) const {
    if (std::isnan(x)) throw invalid_input("encode: NaN input");
    // cells are (p_{k-1}, p_k]: k-1 equals the count of boundaries < x
    const auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), x);
    return static_cast<int>(it - boundaries_.begin()) + 1;
}

double CompandingQuantizer::decode(int k) const {
    if (k < 1 || k > size()) throw invalid_input("decode: cell index out of range");
    return codewords_[static_cast<std::size_t>(k - 1)];
}

double CompandingQuantizer::cell_lo(int k) const {
    if (k < 1 || k > size()) throw invalid_input("cell_lo: index out of range");
    return k == 1 ? -kInf : boundaries_[static_cast<std::size_t>(k - 2)];
}

double CompandingQuantizer::cell_hi(int k) const {
    if (k < 1 || k > size()) throw invalid_input("cell_hi: index out of range");
    return k == size() ? kInf : boundaries_[static_cast<std::size_t>(k - 1)];
}

void CompandingQuantizer::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw error("cannot write " + path);
    out << "# quantizer from: " << density_name_ << "\n";
    out << "k,p_lo,p_hi,c_k\n";
    auto fmt = [](double v, char* buf, std::size_t n) {
        if (std::isinf(v))
            std::snprintf(buf, n, v > 0 ? "inf" : "-inf");
        else
            std::snprintf(buf, n, "%.17g", v);
    };
    char a[40], b[40], c[40];
    for (int k = 1; k <= size(); ++k) {
        fmt(cell_lo(k), a, sizeof a);
        fmt(cell_hi(k), b, sizeof b);
        fmt(decode(k), c, sizeof c);
        out << k << ',' << a << ',' << b << ',' << c << '\n';
    }
}

CompandingQuantizer build_quantizer(const PointDensity& density, int K) {
    if (K < 3)
        throw invalid_parameter("build_quantizer: K must be >= 3 "
                                "(extremal codewords need distinct p_1, p_{K-1})");
    CompandingQuantizer q;
    q.density_name_ = density.name();
    q.boundaries_.resize(static_cast<std::size_t>(K - 1));
    for (int k = 1; k < K; ++k) {
        q.boundaries_[static_cast<std::size_t>(k - 1)] =
            density.inv_compressor(static_cast<double>(k) / K);
    }
    // Guard against numerically equal neighbors (possible only for degenerate
    // shapes; the design invariants forbid zero-mass subintervals).
    for (std::size_t i = 1; i < q.boundaries_.size(); ++i) {
        if (!(q.boundaries_[i] >= q.boundaries_[i - 1]))
            throw design_infeasible("build_quantizer: boundaries not sorted");
    }

    q.codewords_.resize(static_cast<std::size_t>(K));
    q.codewords_.front() = q.boundaries_.front();
    q.codewords_.back() = q.boundaries_.back();
    for (int k = 2; k <= K - 1; ++k) {
        q.codewords_[static_cast<std::size_t>(k - 1)] =
            0.5 * (q.boundaries_[static_cast<std::size_t>(k - 2)] +
                   q.boundaries_[static_cast<std::size_t>(k - 1)]);
    }
    return q;
}

} // namespace dfsq
