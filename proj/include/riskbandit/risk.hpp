#pragma once

#include <span>

#include "riskbandit/dist.hpp"
#include "riskbandit/risk_spec.hpp"

// Plug-in estimators rho(F_n). The span overloads accept samples in any
// order; the `_sorted` entry point expects an ascending sequence and is what
// the bandit policies call on their incrementally sorted buffers.
namespace riskbandit::risk {

double estimate(std::span<const double> samples, const RiskSpec& spec);
double estimate(const dist::Edf& edf, const RiskSpec& spec);
double estimate_sorted(std::span<const double> sorted, const RiskSpec& spec);

// gamma * mean - variance, with the 1/n-normalized variance.
double mean_variance_est(std::span<const double> samples, double gamma);

// The ceil(n(1 - alpha))-th largest sample.
double var_est(std::span<const double> samples, double alpha);

// Empirical CVaR: var + sum (x - var)^+ / (n (1 - alpha)).
double cvar_est(std::span<const double> samples, double alpha);

// sum_i x_(i) * integral of phi over [(i-1)/n, i/n].
double srm_est(std::span<const double> samples, const Spectrum& spectrum);

// Smallest xi with mean l(x_i - xi) <= threshold, by bisection.
double ubsr_est(std::span<const double> samples, const ShortfallRisk& spec);

// Order-statistic form of the empirical CPT value. Ignores spec.truncation.
double cpt_est(std::span<const double> samples, const ProspectValue& spec);

// CPT value with utilities capped at tau, i.e. both integrals taken over [0, tau].
double cpt_est_truncated(std::span<const double> samples, const ProspectValue& spec, double tau);

double distorted_sqrt_risk(std::span<const double> samples);

// W1-Lipschitz constant: (1 - alpha)^-1 for CVaR, sup phi for SRM, K_u / k_u
// for UBSR. Other variants throw DomainError.
double lipschitz_constant(const RiskSpec& spec);

// Default bisection bracket for shortfall risk over samples spanning [lo, hi].
std::pair<double, double> default_ubsr_bracket(double lo, double hi, const ShortfallRisk& spec);

}  // namespace riskbandit::risk
