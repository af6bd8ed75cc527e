#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfsq {

enum class ComputationKind {
    identity,
    square,
    exp_neg_abs,
    one_minus_exp_neg,
    separable_sum_of_squares,
    min_of_n,
};

// A decoder-side function g with first-derivative information. Immutable and
// safe to share. Vector-valued outputs are supported for weighted-fMSE work;
// all builtins are scalar-valued.
class Computation {
public:
    using EvalFn = std::function<void(std::span<const double>, std::span<double>)>;
    using PartialFn =
        std::function<void(int, std::span<const double>, std::span<double>)>;
    using NonsmoothFn = std::function<bool(std::span<const double>)>;

    int arity() const { return arity_; }
    int output_dim() const { return output_dim_; }
    const std::string& name() const { return name_; }

    void eval(std::span<const double> x, std::span<double> out) const;
    void partial(int n, std::span<const double> x, std::span<double> out) const;

    // Scalar-output conveniences.
    double eval1(std::span<const double> x) const;
    double partial1(int n, std::span<const double> x) const;
    double eval1(double x) const { return eval1(std::span<const double>(&x, 1)); }
    double partial1(double x) const {
        return partial1(0, std::span<const double>(&x, 1));
    }

    // True on the declared non-smooth set (measure zero for continuous
    // sources). partial() still returns a deterministic convention value
    // there; Monte Carlo estimators check this flag and resample.
    bool nonsmooth_at(std::span<const double> x) const;

    // Uniform bound on |second partials| when one exists (the C constant of
    // the smoothness conditions); nullopt for the builtins with kinks.
    std::optional<double> second_partial_bound() const {
        return second_partial_bound_;
    }

    static Computation builtin(ComputationKind kind, int arity = 1);
    static Computation custom(std::string name, int arity, int output_dim,
                              EvalFn eval, PartialFn partial,
                              NonsmoothFn nonsmooth = nullptr,
                              std::optional<double> second_bound = std::nullopt);

private:
    Computation() = default;
    void check_arity(std::span<const double> x) const;

    int arity_ = 1;
    int output_dim_ = 1;
    std::string name_;
    EvalFn eval_;
    PartialFn partial_;
    NonsmoothFn nonsmooth_;
    std::optional<double> second_partial_bound_;
};

ComputationKind computation_kind_from_string(const std::string& s);

} // namespace dfsq
