#include "riskbandit/risk_spec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "riskbandit/error.hpp"

namespace riskbandit::risk {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

bool in_open_unit(double a) { return a > 0.0 && a < 1.0; }

}  // namespace

// ----- Spectrum ------------------------------------------------------------

Spectrum Spectrum::uniform() { return Spectrum(Kind::Uniform, 0.0); }

Spectrum Spectrum::cvar(double alpha) {
    if (!in_open_unit(alpha)) throw DomainError("CVaR level must lie in (0, 1)");
    return Spectrum(Kind::Cvar, alpha);
}

Spectrum Spectrum::power(double k) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("power spectrum exponent must be >= 0");
    return Spectrum(Kind::Power, k);
}

Spectrum Spectrum::exponential(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("exponential spectrum rate must be > 0");
    return Spectrum(Kind::Exponential, lambda);
}

Spectrum Spectrum::step(std::vector<double> cell_values) {
    if (cell_values.empty()) throw DomainError("step spectrum needs at least one cell");
    for (double v : cell_values)
        if (!std::isfinite(v)) throw DomainError("step spectrum values must be finite");
    return Spectrum(Kind::Step, 0.0, std::move(cell_values));
}

double Spectrum::operator()(double beta) const {
    switch (kind_) {
        case Kind::Uniform: return 1.0;
        case Kind::Cvar: return beta >= param_ ? 1.0 / (1.0 - param_) : 0.0;
        case Kind::Power: return (param_ + 1.0) * std::pow(beta, param_);
        case Kind::Exponential: return param_ * std::exp(param_ * beta) / std::expm1(param_);
        case Kind::Step: {
            const auto m = cells_.size();
            const auto j = std::min<std::size_t>(static_cast<std::size_t>(beta * static_cast<double>(m)), m - 1);
            return cells_[j];
        }
    }
    return 0.0;
}

double Spectrum::antiderivative(double x) const {
    switch (kind_) {
        case Kind::Uniform: return x;
        case Kind::Cvar: return x > param_ ? (x - param_) / (1.0 - param_) : 0.0;
        case Kind::Power: return std::pow(x, param_ + 1.0);
        case Kind::Exponential: return std::expm1(param_ * x) / std::expm1(param_);
        case Kind::Step: {
            const double m = static_cast<double>(cells_.size());
            double acc = 0.0;
            for (std::size_t j = 0; j < cells_.size(); ++j) {
                const double lo = static_cast<double>(j) / m;
                if (x <= lo) break;
                const double hi = std::min(x, static_cast<double>(j + 1) / m);
                acc += cells_[j] * (hi - lo);
            }
            return acc;
        }
    }
    return 0.0;
}

double Spectrum::mass(double a, double b) const {
    if (kind_ == Kind::Cvar) {
        // Overlap of [a, b] with [alpha, 1], scaled.
        const double lo = std::max(a, param_);
        return b > lo ? (b - lo) / (1.0 - param_) : 0.0;
    }
    return antiderivative(b) - antiderivative(a);
}

double Spectrum::bound() const {
    switch (kind_) {
        case Kind::Uniform: return 1.0;
        case Kind::Cvar: return 1.0 / (1.0 - param_);
        case Kind::Power: return param_ + 1.0;
        case Kind::Exponential: return param_ * std::exp(param_) / std::expm1(param_);
        case Kind::Step: return *std::max_element(cells_.begin(), cells_.end());
    }
    return 0.0;
}

std::vector<double> Spectrum::breakpoints() const {
    if (kind_ == Kind::Cvar) return {param_};
    std::vector<double> out;
    if (kind_ == Kind::Step) {
        for (std::size_t j = 1; j < cells_.size(); ++j)
            if (cells_[j] != cells_[j - 1]) out.push_back(static_cast<double>(j) / static_cast<double>(cells_.size()));
    }
    return out;
}

std::string Spectrum::describe() const {
    switch (kind_) {
        case Kind::Uniform: return "uniform";
        case Kind::Cvar: return "cvar:" + num(param_);
        case Kind::Power: return "power:" + num(param_);
        case Kind::Exponential: return "exp:" + num(param_);
        case Kind::Step: {
            std::string s = "step:";
            for (std::size_t j = 0; j < cells_.size(); ++j) s += (j ? "," : "") + num(cells_[j]);
            return s;
        }
    }
    return {};
}

// ----- ShortfallUtility ----------------------------------------------------

ShortfallUtility ShortfallUtility::linear(double slope) {
    if (!(slope > 0.0) || !std::isfinite(slope)) throw DomainError("linear utility slope must be > 0");
    ShortfallUtility u;
    u.fn_ = [slope](double x) { return slope * x; };
    u.lipschitz_ = u.growth_ = slope;
    u.linear_ = true;
    u.name_ = "linear:" + num(slope);
    return u;
}

ShortfallUtility ShortfallUtility::kinked(double below, double above) {
    if (!(below > 0.0) || !(above > 0.0) || !std::isfinite(below) || !std::isfinite(above))
        throw DomainError("kinked utility slopes must be > 0");
    ShortfallUtility u;
    u.fn_ = [below, above](double x) { return x < 0.0 ? below * x : above * x; };
    u.lipschitz_ = std::max(below, above);
    u.growth_ = std::min(below, above);
    u.kinks_ = {0.0};
    u.linear_ = below == above;
    u.name_ = "kinked:" + num(below) + "," + num(above);
    return u;
}

ShortfallUtility ShortfallUtility::softplus(double growth, double lipschitz) {
    if (!(growth > 0.0) || !(lipschitz >= growth) || !std::isfinite(lipschitz))
        throw DomainError("softplus utility needs 0 < growth <= lipschitz");
    ShortfallUtility u;
    const double extra = lipschitz - growth;
    u.fn_ = [growth, extra](double x) {
        const double sp = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        return growth * x + extra * sp;
    };
    u.lipschitz_ = lipschitz;
    u.growth_ = growth;
    u.linear_ = extra == 0.0;
    u.name_ = "softplus:" + num(growth) + "," + num(lipschitz);
    return u;
}

ShortfallUtility ShortfallUtility::custom(std::function<double(double)> fn, double lipschitz, double growth,
                                          std::vector<double> kinks, std::string name) {
    if (!fn) throw DomainError("custom utility needs a function");
    ShortfallUtility u;
    u.fn_ = std::move(fn);
    u.lipschitz_ = lipschitz;
    u.growth_ = growth;
    u.kinks_ = std::move(kinks);
    u.name_ = std::move(name);
    return u;
}

// ----- WeightFunction / PowerUtility ---------------------------------------

WeightFunction WeightFunction::identity() {
    WeightFunction w;
    w.fn_ = [](double p) { return p; };
    w.name_ = "identity";
    return w;
}

WeightFunction WeightFunction::power(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("power weight exponent must be > 0");
    WeightFunction w;
    w.fn_ = [c](double p) { return std::pow(p, c); };
    w.name_ = "power:" + num(c);
    return w;
}

WeightFunction WeightFunction::tversky_kahneman(double d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("Tversky-Kahneman weight exponent must be > 0");
    WeightFunction w;
    w.fn_ = [d](double p) {
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return 1.0;
        const double a = std::pow(p, d);
        return a / std::pow(a + std::pow(1.0 - p, d), 1.0 / d);
    };
    w.name_ = "tk:" + num(d);
    return w;
}

WeightFunction WeightFunction::custom(std::function<double(double)> fn, std::string name) {
    if (!fn) throw DomainError("custom weight needs a function");
    WeightFunction w;
    w.fn_ = std::move(fn);
    w.name_ = std::move(name);
    return w;
}

double PowerUtility::gain(double x) const { return x > 0.0 ? scale * std::pow(x, exponent) : 0.0; }

double PowerUtility::loss(double x) const { return x < 0.0 ? scale * std::pow(-x, exponent) : 0.0; }

double PowerUtility::slope(double x) const { return scale * exponent * std::pow(x, exponent - 1.0); }

// ----- RiskSpec ------------------------------------------------------------

bool higher_is_better(const RiskSpec& spec) { return std::holds_alternative<MeanVariance>(spec); }

void validate(const RiskSpec& spec) {
    std::visit(overloaded{
                   [](const MeanVariance& s) {
                       if (!(s.gamma >= 0.0) || !std::isfinite(s.gamma))
                           throw DomainError("mean-variance gamma must be >= 0");
                   },
                   [](const ValueAtRisk& s) {
                       if (!in_open_unit(s.alpha)) throw DomainError("VaR level must lie in (0, 1)");
                   },
                   [](const ConditionalValueAtRisk& s) {
                       if (!in_open_unit(s.alpha)) throw DomainError("CVaR level must lie in (0, 1)");
                   },
                   [](const SpectralRisk&) {},
                   [](const ShortfallRisk& s) {
                       const auto& u = s.utility;
                       if (!(u.growth() > 0.0) || !(u.growth() <= u.lipschitz()))
                           throw DomainError("shortfall utility needs 0 < k_u <= K_u");
                       if (!(s.tol > 0.0)) throw DomainError("shortfall tolerance must be > 0");
                       if (!std::isfinite(s.threshold)) throw DomainError("shortfall threshold must be finite");
                   },
                   [](const ProspectValue& s) {
                       for (const auto* u : {&s.gain_utility, &s.loss_utility})
                           if (!(u->exponent > 0.0 && u->exponent <= 1.0) || !(u->scale > 0.0))
                               throw DomainError("CPT utility needs exponent in (0, 1] and scale > 0");
                       for (const auto* w : {&s.w_plus, &s.w_minus})
                           if (std::abs((*w)(0.0)) > 1e-9 || std::abs((*w)(1.0) - 1.0) > 1e-9)
                               throw DomainError("CPT weight must satisfy w(0) = 0 and w(1) = 1");
                       if (!(s.holder_order > 0.0 && s.holder_order <= 1.0))
                           throw DomainError("Hoelder order must lie in (0, 1]");
                       if (!(s.holder_constant > 0.0)) throw DomainError("Hoelder constant must be > 0");
                       if (s.truncation && !(*s.truncation > 0.0)) throw DomainError("truncation level must be > 0");
                   },
                   [](const DistortedSqrt&) {},
               },
               spec);
}

std::string describe(const RiskSpec& spec) {
    return std::visit(overloaded{
                          [](const MeanVariance& s) { return "mv(gamma=" + num(s.gamma) + ")"; },
                          [](const ValueAtRisk& s) { return "var(alpha=" + num(s.alpha) + ")"; },
                          [](const ConditionalValueAtRisk& s) { return "cvar(alpha=" + num(s.alpha) + ")"; },
                          [](const SpectralRisk& s) { return "srm(" + s.spectrum.describe() + ")"; },
                          [](const ShortfallRisk& s) {
                              return "ubsr(" + s.utility.describe() + ",threshold=" + num(s.threshold) + ")";
                          },
                          [](const ProspectValue& s) {
                              std::string d = "cpt(gain=" + num(s.gain_utility.exponent) + "x" + num(s.gain_utility.scale) +
                                              ",loss=" + num(s.loss_utility.exponent) + "x" + num(s.loss_utility.scale) +
                                              ",w+=" + s.w_plus.describe() + ",w-=" + s.w_minus.describe();
                              if (s.truncation) d += ",tau=" + num(*s.truncation);
                              return d + ")";
                          },
                          [](const DistortedSqrt&) { return std::string("distorted-sqrt"); },
                      },
                      spec);
}

}  // namespace riskbandit::risk
