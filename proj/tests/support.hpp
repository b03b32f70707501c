#pragma once

// Hand-rolled generators and independent reference computations shared by the
// unit tests and the acceptance binary. Nothing here calls the estimators it
// is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "riskbandit/risk_spec.hpp"

namespace testsupport {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    std::size_t size(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }
    double level() { return uniform(0.01, 0.99); }

    // Mixes continuous draws with small-integer values so ties are common.
    std::vector<double> sample(std::size_t n) {
        std::vector<double> xs(n);
        const int style = static_cast<int>(size(0, 3));
        const double shift = uniform(-5.0, 5.0);
        const double scale = uniform(0.1, 4.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& x : xs) {
            switch (style) {
                case 0: x = shift + scale * normal(eng_); break;
                case 1: x = shift + scale * uniform(-1.0, 1.0); break;
                case 2: x = static_cast<double>(size(0, 4)) - 2.0; break;
                default: x = coin(0.3) ? shift : shift + scale * std::exp(normal(eng_)); break;
            }
        }
        return xs;
    }

    std::vector<double> sample(std::size_t lo, std::size_t hi) { return sample(size(lo, hi)); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Minimum over a xi grid of xi + sum (x - xi)^+ / (n (1 - alpha)), the
// variational form of CVaR.
inline double cvar_grid_min(const std::vector<double>& xs, double alpha, double pitch) {
    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    const double denom = static_cast<double>(xs.size()) * (1.0 - alpha);
    double best = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<long>(std::ceil((hi - lo) / pitch));
    for (long k = 0; k <= steps; ++k) {
        const double xi = std::min(hi, lo + static_cast<double>(k) * pitch);
        double excess = 0.0;
        for (double x : xs) excess += std::max(x - xi, 0.0);
        best = std::min(best, xi + excess / denom);
    }
    return best;
}

// Quantile form of W1: integral over beta of |Q_a(beta) - Q_b(beta)|, summed
// over the merged grid {i/n_a} U {j/n_b} on which both quantiles are constant.
inline double w1_quantile_form(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double level = 0.0, total = 0.0;
    while (i < a.size() && j < b.size()) {
        // Exact comparison of (i+1)/na and (j+1)/nb via cross-multiplication.
        const double ea = static_cast<double>(i + 1) * nb, eb = static_cast<double>(j + 1) * na;
        const double next = ea <= eb ? static_cast<double>(i + 1) / na : static_cast<double>(j + 1) / nb;
        total += std::abs(a[i] - b[j]) * (next - level);
        level = next;
        if (ea <= eb) ++i;
        if (eb <= ea) ++j;
    }
    return total;
}

// Integral over z >= 0 of w(fraction of samples with g(x) > z), capped at
// `cap`, for a step function of z.
template <class G, class W>
inline double weighted_tail_integral(const std::vector<double>& xs, G g, W w, double cap) {
    std::vector<double> vals;
    for (double x : xs) {
        const double v = g(x);
        if (v > 0.0) vals.push_back(v);
    }
    std::sort(vals.begin(), vals.end());
    const double n = static_cast<double>(xs.size());
    double total = 0.0, z = 0.0;
    for (std::size_t k = 0; k < vals.size() && z < cap; ++k) {
        const double top = std::min(vals[k], cap);
        if (top > z) {
            total += w(static_cast<double>(vals.size() - k) / n) * (top - z);
            z = top;
        }
    }
    return total;
}

// CPT value as the difference of the two weighted tail integrals.
inline double cpt_integral_form(const std::vector<double>& xs, const riskbandit::risk::ProspectValue& s,
                                double cap = std::numeric_limits<double>::infinity()) {
    const double plus = weighted_tail_integral(
        xs, [&](double x) { return s.gain_utility.gain(x); }, [&](double p) { return s.w_plus(p); }, cap);
    const double minus = weighted_tail_integral(
        xs, [&](double x) { return s.loss_utility.loss(x); }, [&](double p) { return s.w_minus(p); }, cap);
    return plus - minus;
}

// Integral over x >= 0 of sqrt(1 - F_n(x)) for non-negative samples.
inline double distorted_sqrt_integral(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double total = 0.0, x0 = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        total += std::sqrt(static_cast<double>(xs.size() - k) / n) * (xs[k] - x0);
        x0 = xs[k];
    }
    return total;
}

}  // namespace testsupport
