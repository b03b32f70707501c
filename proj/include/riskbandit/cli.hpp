#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riskbandit/conc.hpp"
#include "riskbandit/dist.hpp"
#include "riskbandit/risk_spec.hpp"

namespace riskbandit::cli {

// Exit codes: 0 success, 2 input error, 3 domain error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDomain = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Newline-separated reals; blank lines are skipped. Throws InputError naming
// the 1-based line on a parse failure, or when no value is present.
std::vector<double> read_samples(std::istream& in);

// Key/value parameters of one config section (or the equivalent CLI flags).
// `where` prefixes error messages, e.g. "risk".
struct Params {
    std::string where;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::size_t count(const std::string& key) const;
    std::size_t count_or(const std::string& key, std::size_t fallback) const;
    bool boolean_or(const std::string& key, bool fallback) const;
};

double parse_number(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

// "gaussian(mean,stddev)", "bernoulli(p)", "uniform(lo,hi)", "point(v)",
// "empirical(v:p v:p ...)".
dist::ArmModel parse_arm(const std::string& text);
// Arms separated by ';'.
std::vector<dist::ArmModel> parse_arms(const std::string& text);

// "uniform", "cvar:a", "power:k", "exp:lambda", "step:v1,v2,...".
risk::Spectrum parse_spectrum(const std::string& text);
// "linear:c", "kinked:below,above", "softplus:k,K".
risk::ShortfallUtility parse_utility(const std::string& text);
// "identity", "power:c", "tk:d".
risk::WeightFunction parse_weight(const std::string& text);

// measure = mv | var | cvar | srm | ubsr | cpt | distorted-sqrt, plus the
// measure's parameters.
risk::RiskSpec build_risk(const Params& p);

// family = mean-variance | lipschitz | cvar-lipschitz | cvar-density |
// spectral | shortfall | cpt-bounded | cpt-subgaussian. Missing parameters
// default from the risk measure and model when those are given.
conc::BoundSpec build_bound(const Params& p, const risk::RiskSpec* risk, const dist::ArmModel* model);

}  // namespace riskbandit::cli
