#include "riskbandit/conc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "riskbandit/error.hpp"

namespace riskbandit::conc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kE = 2.718281828459045235;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be > 0");
}

void level(double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

void holder(double order) {
    if (!(order > 0.0 && order <= 1.0)) throw DomainError("Hoelder order must lie in (0, 1]");
}

struct LipschitzParams {
    double lipschitz;
    double sigma;
};

// The Lipschitz-family members all reduce to (L, sigma).
std::optional<LipschitzParams> lipschitz_params(const BoundSpec& spec) {
    return std::visit(overloaded{
                          [](const LipschitzBound& b) -> std::optional<LipschitzParams> {
                              return LipschitzParams{b.lipschitz, b.sigma};
                          },
                          [](const CvarLipschitzBound& b) -> std::optional<LipschitzParams> {
                              return LipschitzParams{1.0 / (1.0 - b.alpha), b.sigma};
                          },
                          [](const SpectralLipschitzBound& b) -> std::optional<LipschitzParams> {
                              return LipschitzParams{b.bound, b.sigma};
                          },
                          [](const ShortfallLipschitzBound& b) -> std::optional<LipschitzParams> {
                              return LipschitzParams{b.lipschitz_u / b.growth_u, b.sigma};
                          },
                          [](const auto&) -> std::optional<LipschitzParams> { return std::nullopt; },
                      },
                      spec);
}

double truncated_cpt_offset(const CptSubGaussianBound& b, double n) {
    return 8.0 * b.holder_constant / (b.holder_order * std::pow(n, b.holder_order / 2.0));
}

}  // namespace

void validate(const BoundSpec& spec) {
    std::visit(overloaded{
                   [](const MeanVarianceBound& b) {
                       if (!(b.gamma >= 0.0)) throw DomainError("gamma must be >= 0");
                       positive(b.sigma, "sigma");
                   },
                   [](const LipschitzBound& b) {
                       positive(b.lipschitz, "Lipschitz constant");
                       positive(b.sigma, "sigma");
                   },
                   [](const CvarLipschitzBound& b) {
                       level(b.alpha);
                       positive(b.sigma, "sigma");
                   },
                   [](const CvarDensityBound& b) {
                       level(b.alpha);
                       positive(b.sigma, "sigma");
                       positive(b.eta, "eta");
                       positive(b.delta, "delta");
                   },
                   [](const SpectralLipschitzBound& b) {
                       positive(b.bound, "spectrum bound");
                       positive(b.sigma, "sigma");
                   },
                   [](const ShortfallLipschitzBound& b) {
                       positive(b.lipschitz_u, "K_u");
                       positive(b.growth_u, "k_u");
                       if (b.growth_u > b.lipschitz_u) throw DomainError("k_u must not exceed K_u");
                       positive(b.sigma, "sigma");
                   },
                   [](const CptBoundedBound& b) {
                       positive(b.holder_constant, "Hoelder constant");
                       holder(b.holder_order);
                       positive(b.utility_bound, "utility bound");
                   },
                   [](const CptSubGaussianBound& b) {
                       positive(b.holder_constant, "Hoelder constant");
                       holder(b.holder_order);
                       positive(b.sigma, "sigma");
                   },
               },
               spec);
}

std::string describe(const BoundSpec& spec) {
    return std::visit(
        overloaded{
            [](const MeanVarianceBound& b) { return "mean-variance(gamma=" + num(b.gamma) + ",sigma=" + num(b.sigma) + ")"; },
            [](const LipschitzBound& b) { return "lipschitz(L=" + num(b.lipschitz) + ",sigma=" + num(b.sigma) + ")"; },
            [](const CvarLipschitzBound& b) { return "cvar-lipschitz(alpha=" + num(b.alpha) + ",sigma=" + num(b.sigma) + ")"; },
            [](const CvarDensityBound& b) {
                return "cvar-density(alpha=" + num(b.alpha) + ",sigma=" + num(b.sigma) + ",eta=" + num(b.eta) +
                       ",delta=" + num(b.delta) + ")";
            },
            [](const SpectralLipschitzBound& b) { return "spectral-lipschitz(K=" + num(b.bound) + ",sigma=" + num(b.sigma) + ")"; },
            [](const ShortfallLipschitzBound& b) {
                return "shortfall-lipschitz(K_u=" + num(b.lipschitz_u) + ",k_u=" + num(b.growth_u) + ",sigma=" + num(b.sigma) + ")";
            },
            [](const CptBoundedBound& b) {
                return "cpt-bounded(H=" + num(b.holder_constant) + ",order=" + num(b.holder_order) + ",M=" + num(b.utility_bound) + ")";
            },
            [](const CptSubGaussianBound& b) {
                return "cpt-subgaussian(H=" + num(b.holder_constant) + ",order=" + num(b.holder_order) + ",sigma=" + num(b.sigma) + ")";
            },
        },
        spec);
}

double bound_lipschitz(const BoundSpec& spec) {
    const auto p = lipschitz_params(spec);
    return p ? p->lipschitz : 0.0;
}

Window validity_window(const BoundSpec& spec, std::size_t n) {
    validate(spec);
    if (n < 1) throw DomainError("sample count must be >= 1");
    const double nd = static_cast<double>(n);
    if (const auto p = lipschitz_params(spec)) {
        const double base = 512.0 * p->sigma / std::sqrt(nd);
        return {p->lipschitz * base, p->lipschitz * (base + 16.0 * p->sigma * std::sqrt(kE))};
    }
    if (const auto* b = std::get_if<CptSubGaussianBound>(&spec)) {
        // Strict lower edge.
        return {std::nextafter(truncated_cpt_offset(*b, nd), kInf), kInf};
    }
    return {0.0, kInf};
}

double tail_bound(const BoundSpec& spec, std::size_t n, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("bound not applicable at (n, eps)");
    const Window w = validity_window(spec, n);
    if (!w.contains(eps)) throw DomainError("bound not applicable at (n, eps)");
    const double nd = static_cast<double>(n);

    if (const auto p = lipschitz_params(spec)) {
        const double gap = eps / p->lipschitz - 512.0 * p->sigma / std::sqrt(nd);
        return std::exp(-nd / (256.0 * p->sigma * p->sigma * kE) * gap * gap);
    }
    return std::visit(
        overloaded{
            [&](const MeanVarianceBound& b) {
                const double s2 = b.sigma * b.sigma;
                const double first = b.gamma > 0.0 ? 2.0 * std::exp(-nd * eps * eps / (8.0 * b.gamma * b.gamma * s2)) : 0.0;
                const double second = 2.0 * std::exp(-(nd / 16.0) * std::min(eps * eps / (2.0 * s2 * s2), eps / s2));
                return first + second;
            },
            [&](const CvarDensityBound& b) {
                const double tail = (1.0 - b.alpha) * (1.0 - b.alpha);
                const double first = 2.0 * std::exp(-nd * eps * eps * tail / (8.0 * b.sigma * b.sigma));
                const double second =
                    4.0 * std::exp(-nd * tail * b.eta * b.eta * std::min(eps * eps, 4.0 * b.delta * b.delta) / 64.0);
                return first + second;
            },
            [&](const CptBoundedBound& b) {
                return 2.0 * std::exp(-2.0 * nd * std::pow(eps / (b.holder_constant * b.utility_bound), 2.0 / b.holder_order));
            },
            [&](const CptSubGaussianBound& b) {
                if (n < 2) throw DomainError("bound not applicable at (n, eps)");
                const double a = b.holder_order;
                const double scale = std::pow(2.0 / (b.holder_constant * b.holder_constant * std::log(nd)), 1.0 / a);
                const double excess = eps - truncated_cpt_offset(b, nd);
                return 2.0 * std::exp(-2.0 * nd * scale * std::pow(excess, 2.0 / a));
            },
            [](const auto&) -> double { return 1.0; },  // Lipschitz family handled above
        },
        spec);
}

double invert_tail_bound(const BoundSpec& spec, std::size_t n, double target) {
    if (!(target > 0.0)) throw DomainError("target bound must be > 0");
    const Window w = validity_window(spec, n);
    double lo = w.lo > 0.0 ? w.lo : 0.0;
    double hi = w.hi;
    if (!std::isfinite(hi)) {
        hi = std::max(1.0, 2.0 * lo);
        for (int k = 0; k < 200 && tail_bound(spec, n, hi) > target; ++k) hi *= 2.0;
    }
    if (tail_bound(spec, n, hi) > target) throw DomainError("bound cannot reach the target inside its window");
    if (lo > 0.0 && w.contains(lo) && tail_bound(spec, n, lo) <= target) return lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (w.contains(mid) && tail_bound(spec, n, mid) <= target ? hi : lo) = mid;
    }
    return hi;
}

double confidence_width(double log_round, std::size_t pulls, double lipschitz, double sigma) {
    if (pulls < 1) throw DomainError("confidence width needs at least one pull");
    return lipschitz * sigma * (32.0 * std::sqrt(kE * log_round) + 512.0) / std::sqrt(static_cast<double>(pulls));
}

double lcb_width(std::size_t round, std::size_t pulls, double lipschitz, double sigma) {
    if (round < 2) throw DomainError("confidence width needs round >= 2");
    return confidence_width(std::log(static_cast<double>(round)), pulls, lipschitz, sigma);
}

DensityConstants gaussian_density_constants(double mean, double stddev, double alpha, double delta) {
    level(alpha);
    positive(stddev, "stddev");
    positive(delta, "delta");
    const boost::math::normal law(mean, stddev);
    const double v = boost::math::quantile(law, alpha);
    // The density is unimodal, so its minimum over the window sits at an edge.
    const double edge = std::min(boost::math::pdf(law, v - delta / 2.0), boost::math::pdf(law, v + delta / 2.0));
    return {std::nextafter(edge, 0.0), delta};
}

double mvts_h(double x) {
    if (!(x > 0.0)) throw DomainError("h needs x > 0");
    return 0.5 * (x - 1.0 - std::log(x));
}

double mvts_regret_rhs(std::span<const GaussianArmParams> arms, double gamma) {
    if (arms.size() < 2) throw DomainError("need at least two arms");
    std::vector<double> mv(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (!(arms[i].variance > 0.0)) throw DomainError("arm variances must be > 0");
        mv[i] = gamma * arms[i].mean - arms[i].variance;
    }
    const auto best = static_cast<std::size_t>(std::max_element(mv.begin(), mv.end()) - mv.begin());
    for (std::size_t i = 0; i < arms.size(); ++i)
        if (i != best && mv[i] == mv[best]) throw DomainError("best mean-variance arm is not unique");

    double total = 0.0;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (i == best) continue;
        const double mean_gap = arms[best].mean - arms[i].mean;
        const double h = mvts_h(arms[i].variance / arms[best].variance);
        const double from_mean = mean_gap != 0.0 ? 2.0 / (mean_gap * mean_gap) : kInf;
        const double from_var = h > 0.0 ? 1.0 / h : kInf;
        double factor;
        if (std::isinf(from_mean) && std::isinf(from_var)) throw DomainError("degenerate instance");
        else if (std::isinf(from_mean)) factor = from_var;
        else if (std::isinf(from_var)) factor = from_mean;
        else factor = std::max(from_mean, from_var);

        double spread = 0.0;
        for (const auto& other : arms) spread = std::max(spread, (arms[i].mean - other.mean) * (arms[i].mean - other.mean));
        total += factor * ((mv[best] - mv[i]) + 2.0 * spread);
    }
    return total;
}

}  // namespace riskbandit::conc
