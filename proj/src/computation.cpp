#include "dfsq/computation.hpp"

#include <algorithm>
#include <cmath>

#include "dfsq/errors.hpp"

namespace dfsq {

void Computation::check_arity(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != arity_)
        throw invalid_input("computation '" + name_ + "': arity mismatch");
}

void Computation::eval(std::span<const double> x, std::span<double> out) const {
    check_arity(x);
    if (static_cast<int>(out.size()) != output_dim_)
        throw invalid_input("computation '" + name_ + "': output size mismatch");
    eval_(x, out);
}

void Computation::partial(int n, std::span<const double> x,
                          std::span<double> out) const {
    check_arity(x);
    if (n < 0 || n >= arity_)
        throw invalid_input("computation '" + name_ + "': partial index");
    if (static_cast<int>(out.size()) != output_dim_)
        throw invalid_input("computation '" + name_ + "': output size mismatch");
    partial_(n, x, out);
}

double Computation::eval1(std::span<const double> x) const {
    double v = 0.0;
    eval(x, std::span<double>(&v, 1));
    return v;
}

double Computation::partial1(int n, std::span<const double> x) const {
    double v = 0.0;
    partial(n, x, std::span<double>(&v, 1));
    return v;
}

bool Computation::nonsmooth_at(std::span<const double> x) const {
    check_arity(x);
    return nonsmooth_ ? nonsmooth_(x) : false;
}

namespace {

// Index of the smallest minimizer; the deterministic tie rule for min.
int argmin_index(std::span<const double> x) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(x.size()); ++i)
        if (x[i] < x[best]) best = i;
    return best;
}

} // namespace

Computation Computation::builtin(ComputationKind kind, int arity) {
    Computation c;
    c.output_dim_ = 1;
    switch (kind) {
        case ComputationKind::identity:
            c.arity_ = 1;
            c.name_ = "identity";
            c.eval_ = [](std::span<const double> x, std::span<double> o) {
                o[0] = x[0];
            };
            c.partial_ = [](int, std::span<const double>, std::span<double> o) {
                o[0] = 1.0;
            };
            c.second_partial_bound_ = 0.0;
            break;
        case ComputationKind::square:
            c.arity_ = 1;
            c.name_ = "square";
            c.eval_ = [](std::span<const double> x, std::span<double> o) {
                o[0] = x[0] * x[0];
            };
            c.partial_ = [](int, std::span<const double> x, std::span<double> o) {
                o[0] = 2.0 * x[0];
            };
            c.second_partial_bound_ = 2.0;
            break;
        case ComputationKind::exp_neg_abs:
            c.arity_ = 1;
            c.name_ = "exp_neg_abs";
            c.eval_ = [](std::span<const double> x, std::span<double> o) {
                o[0] = std::exp(-std::abs(x[0]));
            };
            // Kink at 0; the convention value there is the right derivative.
            c.partial_ = [](int, std::span<const double> x, std::span<double> o) {
                const double e = std::exp(-std::abs(x[0]));
                o[0] = x[0] >= 0.0 ? -e : e;
            };
            c.nonsmooth_ = [](std::span<const double> x) { return x[0] == 0.0; };
            break;
        case ComputationKind::one_minus_exp_neg:
            c.arity_ = 1;
            c.name_ = "one_minus_exp_neg";
            c.eval_ = [](std::span<const double> x, std::span<double> o) {
                o[0] = -std::expm1(-x[0]);
            };
            c.partial_ = [](int, std::span<const double> x, std::span<double> o) {
                o[0] = std::exp(-x[0]);
            };
            c.second_partial_bound_ = 1.0;
            break;
        case ComputationKind::separable_sum_of_squares:
            if (arity < 1)
                throw invalid_parameter("sum_of_squares: arity must be >= 1");
            c.arity_ = arity;
            c.name_ = "sum_of_squares";
            c.eval_ = [](std::span<const double> x, std::span<double> o) {
                double s = 0.0;
                for (double v : x) s += v * v;
                o[0] = s;
            };
            c.partial_ = [](int n, std::span<const double> x, std::span<double> o) {
                o[0] = 2.0 * x[n];
            };
            c.second_partial_bound_ = 2.0;
            break;
        case ComputationKind::min_of_n:
            if (arity < 2) throw invalid_parameter("min: arity must be >= 2");
            c.arity_ = arity;
            c.name_ = "min";
            c.eval_ = [](std::span<const double> x, std::span<double> o) {
                o[0] = *std::min_element(x.begin(), x.end());
            };
            c.partial_ = [](int n, std::span<const double> x, std::span<double> o) {
                o[0] = argmin_index(x) == n ? 1.0 : 0.0;
            };
            c.nonsmooth_ = [](std::span<const double> x) {
                const double m = *std::min_element(x.begin(), x.end());
                int hits = 0;
                for (double v : x) hits += (v == m);
                return hits > 1;
            };
            break;
    }
    return c;
}

Computation Computation::custom(std::string name, int arity, int output_dim,
                                EvalFn eval, PartialFn partial,
                                NonsmoothFn nonsmooth,
                                std::optional<double> second_bound) {
    if (arity < 1 || output_dim < 1)
        throw invalid_parameter("custom computation: bad dimensions");
    Computation c;
    c.name_ = std::move(name);
    c.arity_ = arity;
    c.output_dim_ = output_dim;
    c.eval_ = std::move(eval);
    c.partial_ = std::move(partial);
    c.nonsmooth_ = std::move(nonsmooth);
    c.second_partial_bound_ = second_bound;
    return c;
}

ComputationKind computation_kind_from_string(const std::string& s) {
    if (s == "identity") return ComputationKind::identity;
    if (s == "square") return ComputationKind::square;
    if (s == "exp_neg_abs") return ComputationKind::exp_neg_abs;
    if (s == "one_minus_exp_neg") return ComputationKind::one_minus_exp_neg;
    if (s == "sum_of_squares" || s == "separable_sum_of_squares")
        return ComputationKind::separable_sum_of_squares;
    if (s == "min" || s == "min_of_n") return ComputationKind::min_of_n;
    throw invalid_parameter("unknown computation kind: " + s);
}

} // namespace dfsq
