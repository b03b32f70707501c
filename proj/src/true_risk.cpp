#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "riskbandit/dist.hpp"
#include "riskbandit/error.hpp"
#include "riskbandit/risk.hpp"

namespace riskbandit::dist {
namespace {

namespace bm = boost::math;
using risk::ConditionalValueAtRisk;
using risk::DistortedSqrt;
using risk::MeanVariance;
using risk::ProspectValue;
using risk::ShortfallRisk;
using risk::SpectralRisk;
using risk::ValueAtRisk;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void no_oracle() { throw DomainError("no oracle"); }

// Adaptive Gauss-Kronrod on [a, b], split at the interior points in `cuts`.
double integrate(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts = {}) {
    if (!(b > a)) return 0.0;
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::max(a, cuts[i]);
        const double hi = std::min(b, cuts[i + 1]);
        if (hi > lo) total += bm::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-14);
    }
    return total;
}

// tanh-sinh copes with the x^{p-1} endpoint singularity of power utilities.
double integrate_singular(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts = {}) {
    if (!(b > a)) return 0.0;
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    bm::quadrature::tanh_sinh<double> ts;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::max(a, cuts[i]);
        const double hi = std::min(b, cuts[i + 1]);
        if (hi > lo) total += ts.integrate(f, lo, hi, 1e-13);
    }
    return total;
}

constexpr double kGaussSpan = 14.0;  // standard deviations; tail mass ~1e-44

// ----- discrete laws -------------------------------------------------------

struct Discrete {
    std::vector<double> v;  // ascending
    std::vector<double> p;

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) m += p[i] * v[i];
        return m;
    }
    double var_level(double alpha) const {
        double c = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            c += p[i];
            if (c >= alpha - 1e-12) return v[i];
        }
        return v.back();
    }
    double expect(const std::function<double(double)>& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (p[i] > 0.0) s += p[i] * f(v[i]);
        return s;
    }
};

// ----- shortfall risk root finding -----------------------------------------

double solve_shortfall(const std::function<double(double)>& g, double threshold, double lo, double hi) {
    // g is non-increasing; widen until it straddles the threshold.
    for (int k = 0; k < 200 && g(lo) < threshold; ++k) lo -= (hi - lo);
    for (int k = 0; k < 200 && g(hi) > threshold; ++k) hi += (hi - lo);
    if (g(lo) < threshold || g(hi) > threshold) no_oracle();
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (g(mid) <= threshold ? hi : lo) = mid;
    }
    return hi;
}

std::vector<double> shifted_kinks(const risk::ShortfallUtility& l, double xi) {
    std::vector<double> out;
    for (double k : l.kinks()) out.push_back(k + xi);
    return out;
}

// ----- per-variant oracles -------------------------------------------------

double discrete_risk(const Discrete& d, const risk::RiskSpec& spec) {
    return std::visit(
        overloaded{
            [&](const MeanVariance& s) {
                const double m = d.mean();
                return s.gamma * m - d.expect([m](double x) { return (x - m) * (x - m); });
            },
            [&](const ValueAtRisk& s) { return d.var_level(s.alpha); },
            [&](const ConditionalValueAtRisk& s) {
                const double v = d.var_level(s.alpha);
                return v + d.expect([v](double x) { return std::max(x - v, 0.0); }) / (1.0 - s.alpha);
            },
            [&](const SpectralRisk& s) {
                double total = 0.0, c = 0.0;
                for (std::size_t i = 0; i < d.v.size(); ++i) {
                    const double next = std::min(1.0, c + d.p[i]);
                    if (next > c) total += d.v[i] * s.spectrum.mass(c, next);
                    c = next;
                }
                return total;
            },
            [&](const ShortfallRisk& s) {
                auto g = [&](double xi) { return d.expect([&](double x) { return s.utility(x - xi); }); };
                const auto [lo, hi] = risk::default_ubsr_bracket(d.v.front(), d.v.back(), s);
                return solve_shortfall(g, s.threshold, lo, hi);
            },
            [&](const ProspectValue& s) {
                // P(X >= v_i) and P(X > v_i) bracket each atom.
                double plus = 0.0, minus = 0.0, below = 0.0;
                for (std::size_t i = 0; i < d.v.size(); ++i) {
                    const double at_or_below = std::min(1.0, below + d.p[i]);
                    const double x = d.v[i];
                    if (x > 0.0)
                        plus += s.gain_utility.gain(x) * (s.w_plus(1.0 - below) - s.w_plus(1.0 - at_or_below));
                    else if (x < 0.0)
                        minus += s.loss_utility.loss(x) * (s.w_minus(at_or_below) - s.w_minus(below));
                    below = at_or_below;
                }
                return plus - minus;
            },
            [&](const DistortedSqrt&) {
                if (d.v.front() < 0.0) throw DomainError("non-negative support required");
                // Upper-tail sums avoid the cancellation in 1 - F for small tails.
                std::vector<double> tail(d.v.size() + 1, 0.0);
                for (std::size_t i = d.v.size(); i-- > 0;) tail[i] = tail[i + 1] + d.p[i];
                double total = 0.0, prev = 0.0;
                for (std::size_t i = 0; i < d.v.size(); ++i) {
                    total += (d.v[i] - prev) * std::sqrt(std::min(1.0, tail[i]));
                    prev = d.v[i];
                }
                return total;
            },
        },
        spec);
}

double gaussian_risk(const Gaussian& g, const risk::RiskSpec& spec) {
    const bm::normal std_normal(0.0, 1.0);
    const double mu = g.mean, sd = g.stddev;
    auto pdf = [&](double z) { return bm::pdf(std_normal, z); };
    auto cdf = [&](double x) { return bm::cdf(std_normal, (x - mu) / sd); };
    auto sf = [&](double x) { return bm::cdf(bm::complement(std_normal, (x - mu) / sd)); };

    return std::visit(
        overloaded{
            [&](const MeanVariance& s) { return s.gamma * mu - sd * sd; },
            [&](const ValueAtRisk& s) { return mu + sd * bm::quantile(std_normal, s.alpha); },
            [&](const ConditionalValueAtRisk& s) {
                const double z = bm::quantile(std_normal, s.alpha);
                return mu + sd * pdf(z) / (1.0 - s.alpha);
            },
            [&](const SpectralRisk& s) {
                // mu * int phi + sd * int phi(Phi(z)) z pdf(z) dz
                std::vector<double> cuts;
                for (double b : s.spectrum.breakpoints()) cuts.push_back(bm::quantile(std_normal, b));
                const double tail = integrate(
                    [&](double z) { return s.spectrum(bm::cdf(std_normal, z)) * z * pdf(z); }, -kGaussSpan, kGaussSpan,
                    cuts);
                return mu * s.spectrum.mass(0.0, 1.0) + sd * tail;
            },
            [&](const ShortfallRisk& s) {
                if (s.utility.is_linear()) {
                    const double c = s.utility(1.0) - s.utility(0.0);
                    return mu - (s.threshold - s.utility(0.0)) / c;
                }
                auto g_of = [&](double xi) {
                    std::vector<double> cuts;
                    for (double k : shifted_kinks(s.utility, xi)) cuts.push_back((k - mu) / sd);
                    return integrate([&](double z) { return s.utility(mu + sd * z - xi) * pdf(z); }, -kGaussSpan,
                                     kGaussSpan, cuts);
                };
                const auto [lo, hi] = risk::default_ubsr_bracket(mu - 4.0 * sd, mu + 4.0 * sd, s);
                return solve_shortfall(g_of, s.threshold, lo, hi);
            },
            [&](const ProspectValue& s) {
                const double top = mu + 40.0 * sd;
                const double bottom = mu - 40.0 * sd;
                const double plus = top > 0.0 ? integrate_singular(
                                                    [&](double x) { return s.w_plus(sf(x)) * s.gain_utility.slope(x); },
                                                    0.0, top)
                                              : 0.0;
                const double minus = bottom < 0.0 ? integrate_singular(
                                                        [&](double x) {
                                                            return s.w_minus(cdf(-x)) * s.loss_utility.slope(x);
                                                        },
                                                        0.0, -bottom)
                                                  : 0.0;
                return plus - minus;
            },
            [&](const DistortedSqrt&) -> double { no_oracle(); },
        },
        spec);
}

double uniform_risk(const Uniform& u, const risk::RiskSpec& spec) {
    const double a = u.lo, b = u.hi, w = u.hi - u.lo;
    auto cdf = [&](double x) { return std::clamp((x - a) / w, 0.0, 1.0); };

    return std::visit(
        overloaded{
            [&](const MeanVariance& s) { return s.gamma * 0.5 * (a + b) - w * w / 12.0; },
            [&](const ValueAtRisk& s) { return a + w * s.alpha; },
            [&](const ConditionalValueAtRisk& s) { return a + w * 0.5 * (1.0 + s.alpha); },
            [&](const SpectralRisk& s) {
                return integrate([&](double beta) { return s.spectrum(beta) * (a + w * beta); }, 0.0, 1.0,
                                 s.spectrum.breakpoints());
            },
            [&](const ShortfallRisk& s) {
                if (s.utility.is_linear()) {
                    const double c = s.utility(1.0) - s.utility(0.0);
                    return 0.5 * (a + b) - (s.threshold - s.utility(0.0)) / c;
                }
                auto g_of = [&](double xi) {
                    return integrate([&](double x) { return s.utility(x - xi); }, a, b, shifted_kinks(s.utility, xi)) / w;
                };
                const auto [lo, hi] = risk::default_ubsr_bracket(a, b, s);
                return solve_shortfall(g_of, s.threshold, lo, hi);
            },
            [&](const ProspectValue& s) {
                const double plus =
                    b > 0.0 ? integrate_singular([&](double x) { return s.w_plus(1.0 - cdf(x)) * s.gain_utility.slope(x); },
                                                 0.0, b, a > 0.0 ? std::vector<double>{a} : std::vector<double>{})
                            : 0.0;
                const double minus =
                    a < 0.0 ? integrate_singular([&](double x) { return s.w_minus(cdf(-x)) * s.loss_utility.slope(x); },
                                                 0.0, -a, b < 0.0 ? std::vector<double>{-b} : std::vector<double>{})
                            : 0.0;
                return plus - minus;
            },
            [&](const DistortedSqrt&) {
                if (a < 0.0) throw DomainError("non-negative support required");
                return a + 2.0 * w / 3.0;
            },
        },
        spec);
}

}  // namespace

double true_risk(const ArmModel& model, const risk::RiskSpec& spec) {
    risk::validate(spec);
    if (model.is_discrete()) {
        const Empirical e = model.atoms();
        return discrete_risk(Discrete{e.values, e.probs}, spec);
    }
    if (const auto* g = std::get_if<Gaussian>(&model.variant())) return gaussian_risk(*g, spec);
    return uniform_risk(std::get<Uniform>(model.variant()), spec);
}

}  // namespace riskbandit::dist
