#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "riskbandit/risk_spec.hpp"
#include "riskbandit/rng.hpp"

namespace riskbandit::dist {

struct Gaussian {
    double mean;
    double stddev;
};

struct Bernoulli {
    double p;
};

struct Uniform {
    double lo;
    double hi;
};

// Finite discrete law: ascending support values with simplex weights.
struct Empirical {
    std::vector<double> values;
    std::vector<double> probs;
};

// Reward distribution of one arm. Immutable once built; the factories
// validate parameters and throw DomainError on violation.
class ArmModel {
public:
    using Variant = std::variant<Gaussian, Bernoulli, Uniform, Empirical>;

    static ArmModel gaussian(double mean, double stddev);
    static ArmModel bernoulli(double p);
    static ArmModel uniform(double lo, double hi);
    // Values need not be sorted; duplicates are merged.
    static ArmModel empirical(std::vector<double> values, std::vector<double> probs);
    static ArmModel point_mass(double value);

    const Variant& variant() const noexcept { return v_; }

    // Variance proxy sigma^2: the variance for Gaussians, ((b-a)/2)^2 for
    // variants supported on [a, b].
    double subgaussian_proxy() const;
    double mean() const;
    double variance() const;
    double cdf(double x) const;
    bool is_discrete() const noexcept { return !std::holds_alternative<Gaussian>(v_) && !std::holds_alternative<Uniform>(v_); }

    // Support points and masses for the discrete variants (Bernoulli, Empirical).
    Empirical atoms() const;

    std::string describe() const;

private:
    explicit ArmModel(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

double draw(const ArmModel& model, RngStream& rng);
std::vector<double> sample(const ArmModel& model, RngStream& rng, std::size_t n);

// Empirical distribution function over an ascending copy of the samples.
class Edf {
public:
    explicit Edf(std::vector<double> samples);
    static Edf from_sorted(std::vector<double> sorted);

    std::size_t size() const noexcept { return x_.size(); }
    std::span<const double> sorted() const noexcept { return x_; }
    double min() const noexcept { return x_.front(); }
    double max() const noexcept { return x_.back(); }

    // F_n(x) = #{i : x_i <= x} / n.
    double cdf(double x) const;
    double operator()(double x) const { return cdf(x); }

    // Generalized inverse inf{x : F_n(x) >= beta}: the ceil(beta n)-th
    // smallest sample. beta must lie in (0, 1].
    double quantile(double beta) const;

    // k-th smallest sample, 1-based.
    double order_statistic(std::size_t k) const;

private:
    struct SortedTag {};
    Edf(SortedTag, std::vector<double> sorted);
    std::vector<double> x_;
};

// Integral of |F1 - F2| over the merged breakpoints of two step CDFs.
double wasserstein1(const Edf& a, const Edf& b);

// Ground-truth rho(model) from closed forms or adaptive quadrature, accurate
// to about 1e-8. Throws DomainError("no oracle") for unsupported pairs.
double true_risk(const ArmModel& model, const risk::RiskSpec& spec);

}  // namespace riskbandit::dist
