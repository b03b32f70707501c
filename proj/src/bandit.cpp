#include "riskbandit/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskbandit/conc.hpp"
#include "riskbandit/error.hpp"
#include "riskbandit/risk.hpp"

namespace riskbandit::bandit {
namespace {

constexpr double kE = 2.718281828459045235;

std::size_t lcb_argmin(std::span<const double> estimates, std::span<const std::size_t> counts, std::size_t round,
                       double lipschitz, double sigma) {
    const double log_t = std::log(static_cast<double>(round));
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double width = sigma == 0.0 ? 0.0 : conc::confidence_width(log_t, counts[i], lipschitz, sigma);
        const double lcb = estimates[i] - width;
        if (lcb < best_value) {
            best_value = lcb;
            best = i;
        }
    }
    return best;
}

}  // namespace

BanditInstance BanditInstance::make(std::vector<dist::ArmModel> arms, std::optional<double> proxy) {
    if (arms.size() < 2) throw DomainError("a bandit instance needs at least two arms");
    double largest = 0.0;
    for (const auto& a : arms) largest = std::max(largest, a.subgaussian_proxy());
    const double p = proxy.value_or(largest);
    if (!(p >= 0.0) || p < largest * (1.0 - 1e-12))
        throw DomainError("shared sub-Gaussian proxy is below an arm's own proxy");
    return BanditInstance{std::move(arms), p};
}

double BanditInstance::sigma() const { return std::sqrt(subgaussian_proxy); }

Environment::Environment(const BanditInstance& instance, std::uint64_t seed, std::uint64_t trial)
    : instance_(&instance) {
    streams_.reserve(instance.size());
    for (std::size_t k = 0; k < instance.size(); ++k) streams_.push_back(RngStream::substream(seed, trial, k));
}

double Environment::pull(std::size_t arm) { return dist::draw(instance_->arms.at(arm), streams_.at(arm)); }

History::History(std::size_t arms) : counts_(arms, 0), buffers_(arms), mean_(arms, 0.0), m2_(arms, 0.0) {}

void History::record(std::size_t arm, double reward) {
    auto& c = counts_.at(arm);
    ++c;
    buffers_[arm].push_back(reward);
    const double d = reward - mean_[arm];
    mean_[arm] += d / static_cast<double>(c);
    m2_[arm] += d * (reward - mean_[arm]);
    ++rounds_;
}

double History::variance(std::size_t arm) const {
    const auto c = counts_.at(arm);
    return c == 0 ? 0.0 : m2_[arm] / static_cast<double>(c);
}

// ----- Risk-LCB ------------------------------------------------------------

std::size_t risk_lcb_select(const History& history, const risk::RiskSpec& spec, double lipschitz, double sigma) {
    (void)risk::lipschitz_constant(spec);  // rejects non-Lipschitz specs
    const std::size_t K = history.arms();
    const std::size_t round = history.rounds() + 1;
    if (round <= K) return round - 1;

    std::vector<double> estimates(K);
    std::vector<std::size_t> counts(K);
    for (std::size_t i = 0; i < K; ++i) {
        counts[i] = history.count(i);
        if (counts[i] == 0) return i;
        estimates[i] = risk::estimate(history.samples(i), spec);
    }
    return lcb_argmin(estimates, counts, round, lipschitz, sigma);
}

RiskLcb::RiskLcb(std::size_t arms, risk::RiskSpec spec, double sigma)
    : spec_(std::move(spec)),
      lipschitz_(risk::lipschitz_constant(spec_)),
      sigma_(sigma),
      sorted_(arms),
      estimates_(arms, 0.0) {
    risk::validate(spec_);
    if (arms < 2) throw DomainError("Risk-LCB needs at least two arms");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
}

std::size_t RiskLcb::select() const {
    const std::size_t K = sorted_.size();
    const std::size_t round = rounds_ + 1;
    if (round <= K) return round - 1;
    std::vector<std::size_t> counts(K);
    for (std::size_t i = 0; i < K; ++i) counts[i] = sorted_[i].size();
    return lcb_argmin(estimates_, counts, round, lipschitz_, sigma_);
}

void RiskLcb::observe(std::size_t arm, double reward) {
    auto& buf = sorted_.at(arm);
    buf.insert(std::upper_bound(buf.begin(), buf.end(), reward), reward);
    estimates_[arm] = risk::estimate_sorted(buf, spec_);
    ++rounds_;
}

// ----- MVTS ----------------------------------------------------------------

std::size_t mvts_step(const History& history, double gamma, RngStream& rng) {
    const std::size_t K = history.arms();
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K; ++i) {
        const auto T = history.count(i);
        if (T < 2) throw DomainError("MVTS needs two pulls of every arm");
        const double Td = static_cast<double>(T);
        const double rate = std::max(Td * history.variance(i) / 2.0, kMvtsRateFloor);
        const double precision = rng.gamma(Td / 2.0, rate);
        const double theta = rng.normal(history.mean(i), 1.0 / std::sqrt(Td));
        const double value = gamma * theta - 1.0 / precision;
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    return best;
}

Mvts::Mvts(std::size_t arms, double gamma, RngStream rng) : gamma_(gamma), rng_(std::move(rng)), history_(arms) {
    if (arms < 2) throw DomainError("MVTS needs at least two arms");
    if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
}

std::size_t Mvts::select() {
    const std::size_t K = history_.arms();
    if (history_.rounds() < 2 * K) return history_.rounds() % K;
    return mvts_step(history_, gamma_, rng_);
}

// ----- regret --------------------------------------------------------------

std::vector<double> arm_risks(const BanditInstance& instance, const risk::RiskSpec& spec) {
    std::vector<double> out;
    out.reserve(instance.size());
    for (const auto& a : instance.arms) out.push_back(dist::true_risk(a, spec));
    return out;
}

std::vector<double> arm_gaps(const BanditInstance& instance, const risk::RiskSpec& spec) {
    const auto rho = arm_risks(instance, spec);
    const bool higher = risk::higher_is_better(spec);
    const double best = higher ? *std::max_element(rho.begin(), rho.end()) : *std::min_element(rho.begin(), rho.end());
    std::vector<double> gaps(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) gaps[i] = higher ? best - rho[i] : rho[i] - best;
    return gaps;
}

double rho_regret(const BanditInstance& instance, const risk::RiskSpec& spec, std::span<const std::size_t> pulls) {
    const auto gaps = arm_gaps(instance, spec);
    double total = 0.0;
    for (std::size_t a : pulls) {
        if (a >= gaps.size()) throw DomainError("pull refers to a non-existent arm");
        total += gaps[a];
    }
    return total;
}

double risk_lcb_gap_free_bound(std::size_t horizon, std::size_t arms, double sigma, double lipschitz,
                               std::span<const double> gaps) {
    double gap_sum = 0.0;
    for (double g : gaps)
        if (g > 0.0) gap_sum += g;
    const double n = static_cast<double>(horizon);
    const double width_term = 2.0 * sigma * lipschitz * (32.0 * std::sqrt(kE * std::log(n)) + 512.0);
    return (width_term + 6.0 * gap_sum) * std::sqrt(static_cast<double>(arms) * n);
}

}  // namespace riskbandit::bandit
