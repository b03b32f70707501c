#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>

// Tail bounds P(|rho_n - rho| > eps) <= bound(n, eps) for the plug-in
// estimators, their eps-validity windows, and the confidence widths used by
// Risk-LCB. All logarithms are natural. `sigma` is the square root of the
// sub-Gaussian variance proxy throughout.
namespace riskbandit::conc {

// Mean-variance of a sub-Gaussian arm.
struct MeanVarianceBound {
    double gamma;
    double sigma;
};

// Generic W1-Lipschitz risk measure with constant L.
struct LipschitzBound {
    double lipschitz;
    double sigma;
};

// CVaR through its Lipschitz constant (1 - alpha)^-1.
struct CvarLipschitzBound {
    double alpha;
    double sigma;
};

// CVaR of a continuous arm whose density exceeds eta on [VaR - delta/2, VaR + delta/2].
struct CvarDensityBound {
    double alpha;
    double sigma;
    double eta;
    double delta;
};

// Spectral risk with sup phi <= bound.
struct SpectralLipschitzBound {
    double bound;
    double sigma;
};

// Shortfall risk with a utility between growth k_u and Lipschitz K_u slopes.
struct ShortfallLipschitzBound {
    double lipschitz_u;
    double growth_u;
    double sigma;
};

// CPT value with Hoelder weights and utilities bounded by utility_bound (DKW).
struct CptBoundedBound {
    double holder_constant;
    double holder_order;
    double utility_bound;
};

// Truncated CPT value with sub-Gaussian utilities.
struct CptSubGaussianBound {
    double holder_constant;
    double holder_order;
    double sigma;
};

using BoundSpec = std::variant<MeanVarianceBound, LipschitzBound, CvarLipschitzBound, CvarDensityBound,
                               SpectralLipschitzBound, ShortfallLipschitzBound, CptBoundedBound,
                               CptSubGaussianBound>;

struct Window {
    double lo;
    double hi;
    bool contains(double eps) const noexcept { return eps >= lo && eps <= hi; }
};

void validate(const BoundSpec& spec);
std::string describe(const BoundSpec& spec);

// Right-hand side of the bound, unclamped (values above 1 are vacuous and
// returned verbatim). Throws DomainError("bound not applicable at (n, eps)")
// when eps falls outside validity_window(spec, n).
double tail_bound(const BoundSpec& spec, std::size_t n, double eps);

// Admissible eps range. Lipschitz-family bounds use the closed window
// [L * 512 sigma / sqrt(n), L * (512 sigma / sqrt(n) + 16 sigma sqrt(e))];
// the truncated CPT bound needs eps > 8H / (alpha_H n^{alpha_H / 2}); the
// rest hold for every eps > 0 and report (0, inf).
Window validity_window(const BoundSpec& spec, std::size_t n);

inline bool is_vacuous(double bound) noexcept { return bound > 1.0; }

// Lipschitz constant used by the Lipschitz-family bounds; 0 for the others.
double bound_lipschitz(const BoundSpec& spec);

// Smallest eps in the validity window with tail_bound <= target (bisection on
// the monotone bound). Throws DomainError if the window cannot reach target.
double invert_tail_bound(const BoundSpec& spec, std::size_t n, double target);

// Risk-LCB width L sigma (32 sqrt(e log t) + 512) / sqrt(T) at round t >= 2
// after T >= 1 pulls.
double lcb_width(std::size_t round, std::size_t pulls, double lipschitz, double sigma);
// Same width with log t supplied directly.
double confidence_width(double log_round, std::size_t pulls, double lipschitz, double sigma);

// Density constants for the CVaR density bound on a Gaussian arm: eta is
// just below the minimum density over [VaR - delta/2, VaR + delta/2].
struct DensityConstants {
    double eta;
    double delta;
};
DensityConstants gaussian_density_constants(double mean, double stddev, double alpha, double delta);

// h(x) = (x - 1 - log x) / 2.
double mvts_h(double x);

struct GaussianArmParams {
    double mean;
    double variance;
};

// Asymptotic MVTS yardstick
//   sum_{i != best} max{2 / Gamma_{best,i}^2, 1 / h(var_i / var_best)} (Delta_i + 2 max_j (mu_i - mu_j)^2)
// over mean-variance gaps Delta_i. An infinite candidate inside the max
// (equal variances, or equal means) is dropped in favor of the finite one;
// if both are infinite the instance is degenerate and DomainError is thrown.
double mvts_regret_rhs(std::span<const GaussianArmParams> arms, double gamma);

}  // namespace riskbandit::conc
