#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "riskbandit/bandit.hpp"
#include "riskbandit/conc.hpp"
#include "riskbandit/dist.hpp"
#include "riskbandit/risk_spec.hpp"

// Monte-Carlo experiments. Every trial draws from substreams of
// (seed, trial, stream), and per-trial results are reduced in trial order, so
// output does not depend on the worker count.
namespace riskbandit::sim {

// Runs body(trial) for trial in [0, trials) on up to `workers` threads.
// body must only touch state owned by its trial.
void for_each_trial(std::size_t trials, unsigned workers, const std::function<void(std::size_t)>& body);

unsigned default_workers();

// ----- coverage ------------------------------------------------------------

struct CoveragePoint {
    std::size_t n;
    double eps;
};

struct CoverageConfig {
    dist::ArmModel model;
    risk::RiskSpec spec;
    conc::BoundSpec bound;
    std::vector<CoveragePoint> grid;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    // For the truncated CPT bound: truncate at sigma sqrt(log n) + 1 per n.
    bool auto_truncation = false;
};

struct CoverageRow {
    std::size_t n;
    double eps;
    double emp_rate;
    double bound;
    bool vacuous;
    double std_error;
    // Rows with bound <= 0.5 are checked; the rest are informational.
    bool checked;
    bool covered;
};

double truncation_level(double sigma, std::size_t n);

std::vector<CoverageRow> run_coverage(const CoverageConfig& cfg, unsigned workers = 1);

// ----- regret --------------------------------------------------------------

enum class RegretPolicy { RiskLcb, Mvts };

struct RegretConfig {
    bandit::BanditInstance instance;
    RegretPolicy policy = RegretPolicy::RiskLcb;
    risk::RiskSpec spec = risk::ConditionalValueAtRisk{0.9};  // Risk-LCB only
    double gamma = 1.0;                                        // MVTS only
    std::size_t horizon = 1024;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    bool trace = false;
};

struct RegretRow {
    std::size_t t;
    double mean_regret;
    double std_error;
    double gap_free_bound;     // Risk-LCB; NaN for MVTS
    double regret_over_log_t;  // MVTS; NaN for Risk-LCB
    double mvts_rhs;           // MVTS; NaN for Risk-LCB
};

struct TraceRow {
    std::size_t trial;
    std::size_t t;
    std::size_t arm;
    double reward;
    double inst_regret;
};

struct RegretResult {
    std::vector<RegretRow> rows;
    std::vector<TraceRow> trace;
};

// Powers of two up to the horizon, then the horizon itself.
std::vector<std::size_t> checkpoints(std::size_t horizon);

RegretResult run_regret(const RegretConfig& cfg, unsigned workers = 1);

// ----- best-arm identification ---------------------------------------------

enum class BaiPolicy { CvarSr, Qsar };

struct BaiConfig {
    bandit::BanditInstance instance;
    BaiPolicy policy = BaiPolicy::CvarSr;
    double alpha = 0.9;
    std::size_t m = 1;  // Q-SAR only
    std::vector<std::size_t> budgets{};
    std::size_t trials = 100;
    std::uint64_t seed = 0;
};

struct BaiRow {
    std::size_t budget;
    double policy_rate;
    double policy_se;
    double baseline_rate;
    double baseline_se;
};

// The arm set the policy should return: the lowest-CVaR arm or the m
// highest-VaR arms. Throws DomainError when it is not unique.
std::vector<std::size_t> bai_target(const BaiConfig& cfg);

std::vector<BaiRow> run_bai(const BaiConfig& cfg, unsigned workers = 1);

// ----- non-Lipschitz demonstration -----------------------------------------

struct DemoRow {
    double eps;
    double rho_diff;
    double w1;
    double ratio;
};

// Distorted-sqrt risk of Bernoulli(4 eps) versus Bernoulli(eps), against
// their exact W1 distance.
std::vector<DemoRow> run_nonlipschitz_demo(const std::vector<double>& eps_ladder);

// ----- output --------------------------------------------------------------

std::string csv_field(const std::string& s);
std::string format_number(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

CsvTable coverage_table(const std::vector<CoverageRow>& rows);
CsvTable regret_table(const std::vector<RegretRow>& rows, RegretPolicy policy);
CsvTable trace_table(const std::vector<TraceRow>& rows);
CsvTable bai_table(const std::vector<BaiRow>& rows);
CsvTable demo_table(const std::vector<DemoRow>& rows);

// Embedded assertions reported by `riskbandit run`.
struct Check {
    std::string name;
    bool passed;
    std::string detail;
};

std::vector<Check> coverage_checks(const std::vector<CoverageRow>& rows);
std::vector<Check> bai_checks(const std::vector<BaiRow>& rows);
std::vector<Check> demo_checks(const std::vector<DemoRow>& rows);
std::vector<Check> regret_checks(const std::vector<RegretRow>& rows, RegretPolicy policy);

}  // namespace riskbandit::sim
