#include "riskbandit/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "riskbandit/error.hpp"
#include "riskbandit/numeric.hpp"

namespace riskbandit::risk {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> sorted_copy(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("empty sample");
    std::vector<double> v(samples.begin(), samples.end());
    for (double x : v)
        if (!std::isfinite(x)) throw DomainError("non-finite sample");
    std::sort(v.begin(), v.end());
    return v;
}

void require_level(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("risk level alpha must lie in (0, 1)");
}

// 1-based ascending position of the empirical VaR: floor(n alpha) + 1, i.e.
// the ceil(n (1 - alpha))-th largest sample.
std::size_t var_position(std::size_t n, double alpha) {
    return std::min(detail::floor_index(static_cast<double>(n) * alpha) + 1, n);
}

double mean_variance_sorted(std::span<const double> x, double gamma) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    return gamma * mean - var;
}

double var_sorted(std::span<const double> x, double alpha) {
    require_level(alpha);
    return x[var_position(x.size(), alpha) - 1];
}

double cvar_sorted(std::span<const double> x, double alpha) {
    require_level(alpha);
    const double v = x[var_position(x.size(), alpha) - 1];
    double excess = 0.0;
    for (std::size_t i = x.size(); i-- > 0 && x[i] > v;) excess += x[i] - v;
    return v + excess / (static_cast<double>(x.size()) * (1.0 - alpha));
}

double srm_sorted(std::span<const double> x, const Spectrum& phi) {
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    if (phi.kind() == Spectrum::Kind::Step) {
        for (double c : phi.cells())
            if (c < 0.0) throw DomainError("invalid spectrum");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(i) / nd;
        const double b = static_cast<double>(i + 1) / nd;
        if (phi(a) < 0.0 || phi(0.5 * (a + b)) < 0.0) throw DomainError("invalid spectrum");
        const double w = phi.mass(a, b);
        if (w != 0.0) total += x[i] * w;
    }
    return total;
}

void check_monotone(const ShortfallUtility& l, double lo, double hi) {
    constexpr int kGrid = 256;
    double prev = l(lo);
    for (int k = 1; k <= kGrid; ++k) {
        const double z = lo + (hi - lo) * k / kGrid;
        const double cur = l(z);
        if (cur < prev - 1e-12 * (1.0 + std::abs(prev))) throw DomainError("utility is not non-decreasing");
        prev = cur;
    }
}

double ubsr_sorted(std::span<const double> x, const ShortfallRisk& spec) {
    validate(RiskSpec{spec});
    const auto& l = spec.utility;
    const auto [lo0, hi0] = spec.bracket ? *spec.bracket : default_ubsr_bracket(x.front(), x.back(), spec);
    if (!(lo0 < hi0)) throw DomainError("bracket does not contain root");
    check_monotone(l, x.front() - hi0, x.back() - lo0);

    const double inv_n = 1.0 / static_cast<double>(x.size());
    auto g = [&](double xi) {
        double s = 0.0;
        for (double v : x) s += l(v - xi);
        return s * inv_n;
    };
    const double alpha = spec.threshold;
    const double g_lo = g(lo0);
    const double g_hi = g(hi0);
    if (g_lo < alpha || g_hi > alpha) throw DomainError("bracket does not contain root");
    if (g_lo <= alpha) return lo0;

    // Invariant: g(lo) > alpha >= g(hi).
    double lo = lo0, hi = hi0;
    while (hi - lo > spec.tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (g(mid) <= alpha ? hi : lo) = mid;
    }
    return hi;
}

double cpt_sorted(std::span<const double> x, const ProspectValue& spec, double cap) {
    validate(RiskSpec{spec});
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    double plus = 0.0, minus = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double v = x[k - 1];
        if (v > 0.0) {
            const double u = std::min(spec.gain_utility.gain(v), cap);
            plus += u * (spec.w_plus(static_cast<double>(n + 1 - k) / nd) - spec.w_plus(static_cast<double>(n - k) / nd));
        } else if (v < 0.0) {
            const double u = std::min(spec.loss_utility.loss(v), cap);
            minus += u * (spec.w_minus(static_cast<double>(k) / nd) - spec.w_minus(static_cast<double>(k - 1) / nd));
        }
    }
    return plus - minus;
}

double distorted_sqrt_sorted(std::span<const double> x) {
    if (x.front() < 0.0) throw DomainError("non-negative support required");
    const std::size_t n = x.size();
    double total = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += (x[i] - prev) * std::sqrt(static_cast<double>(n - i) / static_cast<double>(n));
        prev = x[i];
    }
    return total;
}

}  // namespace

double estimate_sorted(std::span<const double> sorted, const RiskSpec& spec) {
    if (sorted.empty()) throw DomainError("empty sample");
    return std::visit(overloaded{
                          [&](const MeanVariance& s) { return mean_variance_sorted(sorted, s.gamma); },
                          [&](const ValueAtRisk& s) { return var_sorted(sorted, s.alpha); },
                          [&](const ConditionalValueAtRisk& s) { return cvar_sorted(sorted, s.alpha); },
                          [&](const SpectralRisk& s) { return srm_sorted(sorted, s.spectrum); },
                          [&](const ShortfallRisk& s) { return ubsr_sorted(sorted, s); },
                          [&](const ProspectValue& s) {
                              if (s.truncation) {
                                  if (!(*s.truncation > 0.0)) throw DomainError("truncation level must be > 0");
                                  return cpt_sorted(sorted, s, *s.truncation);
                              }
                              return cpt_sorted(sorted, s, INFINITY);
                          },
                          [&](const DistortedSqrt&) { return distorted_sqrt_sorted(sorted); },
                      },
                      spec);
}

double estimate(const dist::Edf& edf, const RiskSpec& spec) { return estimate_sorted(edf.sorted(), spec); }

double estimate(std::span<const double> samples, const RiskSpec& spec) {
    return estimate_sorted(sorted_copy(samples), spec);
}

double mean_variance_est(std::span<const double> samples, double gamma) {
    return mean_variance_sorted(sorted_copy(samples), gamma);
}

double var_est(std::span<const double> samples, double alpha) {
    require_level(alpha);
    return var_sorted(sorted_copy(samples), alpha);
}

double cvar_est(std::span<const double> samples, double alpha) {
    require_level(alpha);
    return cvar_sorted(sorted_copy(samples), alpha);
}

double srm_est(std::span<const double> samples, const Spectrum& spectrum) {
    return srm_sorted(sorted_copy(samples), spectrum);
}

double ubsr_est(std::span<const double> samples, const ShortfallRisk& spec) {
    return ubsr_sorted(sorted_copy(samples), spec);
}

double cpt_est(std::span<const double> samples, const ProspectValue& spec) {
    return cpt_sorted(sorted_copy(samples), spec, INFINITY);
}

double cpt_est_truncated(std::span<const double> samples, const ProspectValue& spec, double tau) {
    if (!(tau > 0.0)) throw DomainError("truncation level must be > 0");
    return cpt_sorted(sorted_copy(samples), spec, tau);
}

double distorted_sqrt_risk(std::span<const double> samples) { return distorted_sqrt_sorted(sorted_copy(samples)); }

double lipschitz_constant(const RiskSpec& spec) {
    return std::visit(overloaded{
                          [](const ConditionalValueAtRisk& s) {
                              require_level(s.alpha);
                              return 1.0 / (1.0 - s.alpha);
                          },
                          [](const SpectralRisk& s) { return s.spectrum.bound(); },
                          [](const ShortfallRisk& s) { return s.utility.lipschitz() / s.utility.growth(); },
                          [](const auto&) -> double { throw DomainError("not a Lipschitz risk measure"); },
                      },
                      spec);
}

std::pair<double, double> default_ubsr_bracket(double lo, double hi, const ShortfallRisk& spec) {
    const auto& l = spec.utility;
    const double slack =
        (hi - lo + 1.0) * l.lipschitz() / l.growth() + std::abs(spec.threshold - l(0.0)) / l.growth();
    return {lo - slack, hi + slack};
}

}  // namespace riskbandit::risk
