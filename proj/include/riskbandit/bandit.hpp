#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskbandit/dist.hpp"
#include "riskbandit/risk_spec.hpp"
#include "riskbandit/rng.hpp"

// Arms are indexed from 0. Rounds are counted from 1, so round t <= K of the
// Risk-LCB initialization sweep pulls arm t - 1.
namespace riskbandit::bandit {

struct BanditInstance {
    std::vector<dist::ArmModel> arms;
    // Shared variance proxy sigma^2, at least every arm's own proxy.
    double subgaussian_proxy;

    // Uses the largest arm proxy when `proxy` is not given. Throws DomainError
    // for K < 2 or a proxy below some arm's.
    static BanditInstance make(std::vector<dist::ArmModel> arms, std::optional<double> proxy = {});

    std::size_t size() const noexcept { return arms.size(); }
    double sigma() const;
};

// One replica's arms, each drawing from its own (seed, trial, arm) substream.
class Environment {
public:
    Environment(const BanditInstance& instance, std::uint64_t seed, std::uint64_t trial);

    double pull(std::size_t arm);
    const BanditInstance& instance() const noexcept { return *instance_; }
    std::size_t size() const noexcept { return instance_->size(); }

private:
    const BanditInstance* instance_;
    std::vector<RngStream> streams_;
};

// Pull counts and raw reward buffers after `rounds()` completed rounds.
class History {
public:
    explicit History(std::size_t arms);

    void record(std::size_t arm, double reward);

    std::size_t arms() const noexcept { return counts_.size(); }
    std::size_t rounds() const noexcept { return rounds_; }
    std::size_t count(std::size_t arm) const { return counts_.at(arm); }
    std::span<const double> samples(std::size_t arm) const { return buffers_.at(arm); }
    double mean(std::size_t arm) const { return mean_.at(arm); }
    // 1/n-normalized.
    double variance(std::size_t arm) const;

private:
    std::vector<std::size_t> counts_;
    std::vector<std::vector<double>> buffers_;
    std::vector<double> mean_;
    std::vector<double> m2_;
    std::size_t rounds_ = 0;
};

// Index minimizing estimate - lcb_width(t, T_i, L, sigma) for round
// t = history.rounds() + 1; the init sweep returns t - 1 for t <= K. Ties go
// to the lowest index.
std::size_t risk_lcb_select(const History& history, const risk::RiskSpec& spec, double lipschitz,
                            double sigma);

// Risk-LCB with per-arm sorted buffers and cached estimates, for long runs.
class RiskLcb {
public:
    // sigma is the shared sub-Gaussian parameter; sigma = 0 makes the policy
    // greedy on empirical risk.
    RiskLcb(std::size_t arms, risk::RiskSpec spec, double sigma);

    std::size_t select() const;
    void observe(std::size_t arm, double reward);
    std::size_t rounds() const noexcept { return rounds_; }
    double estimate(std::size_t arm) const { return estimates_.at(arm); }
    double lipschitz() const noexcept { return lipschitz_; }

private:
    risk::RiskSpec spec_;
    double lipschitz_;
    double sigma_;
    std::vector<std::vector<double>> sorted_;
    std::vector<double> estimates_;
    std::size_t rounds_ = 0;
};

// One MVTS decision: per arm draw precision ~ Gamma(T/2, rate T var/2) and
// mean ~ N(mean, 1/T); return argmax gamma * mean - 1 / precision. Every arm
// must have at least two samples.
std::size_t mvts_step(const History& history, double gamma, RngStream& rng);

inline constexpr double kMvtsRateFloor = 1e-12;

// MVTS with the two-sweep initialization.
class Mvts {
public:
    Mvts(std::size_t arms, double gamma, RngStream rng);

    std::size_t select();
    void observe(std::size_t arm, double reward) { history_.record(arm, reward); }
    const History& history() const noexcept { return history_; }

private:
    double gamma_;
    RngStream rng_;
    History history_;
};

// ----- fixed-budget best-arm identification --------------------------------

struct PhaseDecision {
    std::size_t phase;  // 1-based
    std::size_t arm;
    bool accepted;
    double estimate;
};

struct BaiOutcome {
    std::vector<std::size_t> recommended;  // ascending
    std::vector<PhaseDecision> log;
    std::vector<std::size_t> pulls;  // per arm
    std::size_t budget_used = 0;
};

// Cumulative per-arm pull targets n_1 .. n_{K-1} with
// n_p = ceil((n - K) / (logbar(K) (K + 1 - p))), logbar(K) = 1/2 + sum_{i=2}^K 1/i.
std::vector<std::size_t> phase_schedule(std::size_t arms, std::size_t budget);
double logbar(std::size_t arms);
std::size_t minimal_budget(std::size_t arms);

// Successive rejects on empirical CVaR: each phase rejects the surviving arm
// with the largest estimate (ties: highest index).
BaiOutcome run_cvar_sr(Environment& env, double alpha, std::size_t budget);

// Successive accept-reject on empirical VaR for the m arms with the highest
// VaR.
BaiOutcome run_qsar(Environment& env, double alpha, std::size_t m, std::size_t budget);

enum class BaiTarget { LowestCvar, HighestVar };

// Uniform-allocation baseline: floor(budget / K) pulls per arm, then pick the
// best `m` by the target's empirical criterion.
BaiOutcome run_uniform_bai(Environment& env, BaiTarget target, double alpha, std::size_t m,
                           std::size_t budget);

// ----- regret --------------------------------------------------------------

// True rho of every arm.
std::vector<double> arm_risks(const BanditInstance& instance, const risk::RiskSpec& spec);

// Per-pull gaps |rho(best) - rho(arm)| under the measure's orientation.
std::vector<double> arm_gaps(const BanditInstance& instance, const risk::RiskSpec& spec);

// sum_t gap(A_t). Non-negative.
double rho_regret(const BanditInstance& instance, const risk::RiskSpec& spec,
                  std::span<const std::size_t> pulls);

// (2 sigma L (32 sqrt(e log n) + 512) + 6 sum Delta_i) sqrt(K n).
double risk_lcb_gap_free_bound(std::size_t horizon, std::size_t arms, double sigma, double lipschitz,
                               std::span<const double> gaps);

}  // namespace riskbandit::bandit
