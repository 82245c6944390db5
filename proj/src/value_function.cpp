#include "riskrl/value_function.hpp"
#include "riskrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace riskrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Entropic map normalized so that v(y0) = 0 and v stays strictly increasing
// for either sign of lambda: v(u) = (exp(lambda u) - 1) / lambda, u = y - y0.
double entropic_value(double lambda, double u) {
    if (lambda == 0.0) return u;
    if (std::abs(lambda * u) < 1e-8) {
        // series around lambda*u = 0 avoids 0/0 noise
        return u * (1.0 + 0.5 * lambda * u + lambda * lambda * u * u / 6.0);
    }
    return std::expm1(lambda * u) / lambda;
}

// d/dlambda [(exp(lambda u) - 1)/lambda]
double entropic_dlambda(double lambda, double u) {
    double x = lambda * u;
    if (std::abs(x) < 1e-4) {
        return u * u * (0.5 + x / 3.0 + x * x / 8.0);
    }
    return (u * std::exp(x)) / lambda - std::expm1(x) / (lambda * lambda);
}

} // namespace

const char* family_name(ValueFamily f) {
    switch (f) {
        case ValueFamily::Prospect:  return "prospect";
        case ValueFamily::Linear:    return "linear";
        case ValueFamily::Entropic:  return "entropic";
        case ValueFamily::LProspect: return "lprospect";
    }
    return "?";
}

ValueFamily family_from_name(const std::string& name) {
    if (name == "prospect") return ValueFamily::Prospect;
    if (name == "linear") return ValueFamily::Linear;
    if (name == "entropic") return ValueFamily::Entropic;
    if (name == "lprospect") return ValueFamily::LProspect;
    throw ConfigError("unknown value-function family: " + name);
}

void ValueFnSpec::validate() const {
    std::ostringstream bad;
    auto require = [&](bool ok, const char* msg) {
        if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << msg;
    };
    switch (family) {
        case ValueFamily::Prospect:
            require(k_minus > 0 && k_plus > 0, "prospect requires k-, k+ > 0");
            require(zeta_minus > 0 && zeta_plus > 0, "prospect requires zeta-, zeta+ > 0");
            break;
        case ValueFamily::LProspect:
            require(k_minus > 0 && k_plus > 0, "lprospect requires k-, k+ > 0");
            require(zeta_minus > 0 && zeta_plus > 0, "lprospect requires zeta-, zeta+ > 0");
            require(epsilon > 0, "lprospect requires epsilon > 0");
            break;
        case ValueFamily::Linear:
            require(std::abs(kappa) < 1, "linear requires |kappa| < 1");
            break;
        case ValueFamily::Entropic:
            require(lambda != 0.0, "entropic requires lambda != 0");
            break;
    }
    if (bad.tellp() > 0) throw ConfigError("invalid value-function parameters: " + bad.str());
}

int ValueFnSpec::free_param_count() const {
    switch (family) {
        case ValueFamily::Prospect:
        case ValueFamily::LProspect: return 4;
        case ValueFamily::Linear:
        case ValueFamily::Entropic:  return 1;
    }
    return 0;
}

std::vector<std::string> ValueFnSpec::param_names() const {
    switch (family) {
        case ValueFamily::Prospect:
        case ValueFamily::LProspect:
            return {"k_minus", "k_plus", "zeta_minus", "zeta_plus"};
        case ValueFamily::Linear:   return {"kappa"};
        case ValueFamily::Entropic: return {"lambda"};
    }
    return {};
}

std::vector<double> ValueFnSpec::params() const {
    switch (family) {
        case ValueFamily::Prospect:
        case ValueFamily::LProspect:
            return {k_minus, k_plus, zeta_minus, zeta_plus};
        case ValueFamily::Linear:   return {kappa};
        case ValueFamily::Entropic: return {lambda};
    }
    return {};
}

void ValueFnSpec::set_params(std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != free_param_count())
        throw ConfigError("parameter vector length does not match family");
    switch (family) {
        case ValueFamily::Prospect:
        case ValueFamily::LProspect:
            k_minus = theta[0];
            k_plus = theta[1];
            zeta_minus = theta[2];
            zeta_plus = theta[3];
            break;
        case ValueFamily::Linear:   kappa = theta[0]; break;
        case ValueFamily::Entropic: lambda = theta[0]; break;
    }
}

double eval(const ValueFnSpec& spec, double y) {
    const double u = y - spec.y0;
    switch (spec.family) {
        case ValueFamily::Prospect:
            return u > 0 ? spec.k_plus * std::pow(u, spec.zeta_plus)
                         : -spec.k_minus * std::pow(-u, spec.zeta_minus);
        case ValueFamily::Linear:
            return u > 0 ? (1.0 - spec.kappa) * u : (1.0 + spec.kappa) * u;
        case ValueFamily::Entropic:
            return entropic_value(spec.lambda, u);
        case ValueFamily::LProspect:
            if (u > 0) {
                return spec.k_plus *
                       (std::pow(u + spec.epsilon, spec.zeta_plus) -
                        std::pow(spec.epsilon, spec.zeta_plus));
            }
            return -spec.k_minus *
                   (std::pow(-u + spec.epsilon, spec.zeta_minus) -
                    std::pow(spec.epsilon, spec.zeta_minus));
    }
    return 0.0;
}

double eval_tilde(const ValueFnSpec& spec, double y) { return eval(spec, y) - spec.v0; }

double deriv_y(const ValueFnSpec& spec, double y) {
    const double u = y - spec.y0;
    switch (spec.family) {
        case ValueFamily::Prospect: {
            if (u > 0) return spec.k_plus * spec.zeta_plus * std::pow(u, spec.zeta_plus - 1.0);
            if (u < 0) return spec.k_minus * spec.zeta_minus * std::pow(-u, spec.zeta_minus - 1.0);
            // at the reference point one-sided limits only agree in the
            // linear case k- = k+, zeta = 1
            if (spec.zeta_plus == 1.0 && spec.zeta_minus == 1.0 && spec.k_plus == spec.k_minus)
                return spec.k_plus;
            throw MathError("prospect value function is not differentiable at the reference point");
        }
        case ValueFamily::Linear:
            return u > 0 ? (1.0 - spec.kappa) : (1.0 + spec.kappa);
        case ValueFamily::Entropic:
            return std::exp(spec.lambda * u);
        case ValueFamily::LProspect:
            // gain branch covers y = y0, matching the closed-form derivative
            if (u >= 0)
                return spec.k_plus * spec.zeta_plus *
                       std::pow(u + spec.epsilon, spec.zeta_plus - 1.0);
            return spec.k_minus * spec.zeta_minus *
                   std::pow(-u + spec.epsilon, spec.zeta_minus - 1.0);
    }
    return 0.0;
}

void deriv_theta(const ValueFnSpec& spec, double y, std::span<double> out) {
    const double u = y - spec.y0;
    switch (spec.family) {
        case ValueFamily::Prospect: {
            out[0] = out[1] = out[2] = out[3] = 0.0;
            if (u > 0) {
                double p = std::pow(u, spec.zeta_plus);
                out[1] = p;
                out[3] = spec.k_plus * p * std::log(u);
            } else if (u < 0) {
                double p = std::pow(-u, spec.zeta_minus);
                out[0] = -p;
                out[2] = -spec.k_minus * p * std::log(-u);
            }
            return;
        }
        case ValueFamily::Linear:
            out[0] = u > 0 ? -u : u;
            return;
        case ValueFamily::Entropic:
            out[0] = entropic_dlambda(spec.lambda, u);
            return;
        case ValueFamily::LProspect: {
            out[0] = out[1] = out[2] = out[3] = 0.0;
            if (u > 0) {
                double pe = std::pow(u + spec.epsilon, spec.zeta_plus);
                double p0 = std::pow(spec.epsilon, spec.zeta_plus);
                out[1] = pe - p0;
                out[3] = spec.k_plus * (pe * std::log(u + spec.epsilon) - p0 * std::log(spec.epsilon));
            } else if (u < 0) {
                double pe = std::pow(-u + spec.epsilon, spec.zeta_minus);
                double p0 = std::pow(spec.epsilon, spec.zeta_minus);
                out[0] = -(pe - p0);
                out[2] = -spec.k_minus * (pe * std::log(-u + spec.epsilon) - p0 * std::log(spec.epsilon));
            }
            return;
        }
    }
}

std::vector<double> deriv_theta(const ValueFnSpec& spec, double y) {
    std::vector<double> out(spec.free_param_count());
    deriv_theta(spec, y, out);
    return out;
}

namespace {

// Candidate extremes of Dv on [lo, hi]: interval endpoints plus one-sided
// limits at the reference point when it lies inside. Each branch of every
// family has a monotone derivative, so these candidates are exact.
// Returns {min, max}; max may be +inf for prospect with zeta < 1.
std::pair<double, double> deriv_extremes(const ValueFnSpec& spec, double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("lipschitz_bounds requires lo < hi");
    double mn = kInf, mx = -kInf;
    auto add = [&](double d) {
        mn = std::min(mn, d);
        mx = std::max(mx, d);
    };
    const double y0 = spec.y0;

    switch (spec.family) {
        case ValueFamily::Linear:
            if (hi > y0) add(1.0 - spec.kappa);
            if (lo <= y0) add(1.0 + spec.kappa);
            return {mn, mx};
        case ValueFamily::Entropic:
            add(std::exp(spec.lambda * (lo - y0)));
            add(std::exp(spec.lambda * (hi - y0)));
            return {mn, mx};
        case ValueFamily::Prospect: {
            // each branch derivative k z u^(z-1) is monotone in the distance
            // u from the reference point, so extremes sit at the branch
            // endpoints; the u -> 0+ limit is 0, k, or +inf depending on z
            auto power_branch = [&](double k, double z, double ulo, double uhi) {
                add(k * z * std::pow(uhi, z - 1.0));
                if (ulo > 0) add(k * z * std::pow(ulo, z - 1.0));
                else if (z < 1.0) add(kInf);
                else if (z > 1.0) add(0.0);
                else add(k);
            };
            if (hi > y0) power_branch(spec.k_plus, spec.zeta_plus, std::max(0.0, lo - y0), hi - y0);
            if (lo < y0) power_branch(spec.k_minus, spec.zeta_minus, std::max(0.0, y0 - hi), y0 - lo);
            return {mn, mx};
        }
        case ValueFamily::LProspect: {
            auto smooth_branch = [&](double k, double z, double ulo, double uhi) {
                add(k * z * std::pow(uhi + spec.epsilon, z - 1.0));
                add(k * z * std::pow(ulo + spec.epsilon, z - 1.0));
            };
            if (hi >= y0) smooth_branch(spec.k_plus, spec.zeta_plus, std::max(0.0, lo - y0), hi - y0);
            if (lo < y0) smooth_branch(spec.k_minus, spec.zeta_minus, std::max(0.0, y0 - hi), y0 - lo);
            return {mn, mx};
        }
    }
    return {mn, mx};
}

} // namespace

double deriv_min_on(const ValueFnSpec& spec, double lo, double hi) {
    return deriv_extremes(spec, lo, hi).first;
}

LipschitzBounds lipschitz_bounds(const ValueFnSpec& spec, double lo, double hi) {
    spec.validate();
    auto [mn, mx] = deriv_extremes(spec, lo, hi);
    if (!std::isfinite(mx))
        throw MathError("derivative unbounded on interval (prospect with zeta < 1 at the reference point)");
    return LipschitzBounds{mn, mx, lo, hi};
}

bool ball_condition_holds(const ValueFnSpec& spec, double M, double gamma, double K) {
    if (!(M > 0) || !(gamma >= 0 && gamma < 1))
        throw ConfigError("ball condition requires M > 0 and gamma in [0, 1)");
    if (!(K > 0)) return false;
    const double worst = std::max(std::abs(eval_tilde(spec, M)), std::abs(eval_tilde(spec, -M)));
    const double eps_K = deriv_min_on(spec, -M - K, M + K);
    return worst / (1.0 - gamma) < K * eps_K;
}

double lambert_w0(double x) {
    if (x < 0) throw ConfigError("lambert_w0 defined for x >= 0 only");
    if (x == 0) return 0.0;
    // Halley iteration from w = log(1 + x)
    double w = std::log1p(x);
    for (int i = 0; i < 64; ++i) {
        double ew = std::exp(w);
        double f = w * ew - x;
        double step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

double entropic_lambda_bound(double M, double gamma) {
    if (!(M > 0) || !(gamma >= 0 && gamma < 1))
        throw ConfigError("entropic_lambda_bound requires M > 0 and gamma in [0, 1)");
    return lambert_w0(2.0 * M * (1.0 - gamma) / std::exp(1.0)) / (2.0 * M);
}

double find_admissible_K(const ValueFnSpec& spec, double M, double gamma) {
    spec.validate();
    if (spec.family == ValueFamily::Entropic) {
        const double K = 1.0 / std::abs(spec.lambda);
        if (!ball_condition_holds(spec, M, gamma, K))
            throw SolverError("no admissible radius: entropic lambda outside its admissible range");
        return K;
    }
    // doubling search then bisection onto the smallest admissible radius
    double hi = 1.0;
    while (!ball_condition_holds(spec, M, gamma, hi)) {
        hi *= 2.0;
        if (hi > 1e9)
            throw SolverError("no admissible radius found below 1e9");
    }
    double lo = hi * 0.5;
    if (hi == 1.0) lo = 0.0;
    while (hi - lo > 1e-6 * hi) {
        double mid = 0.5 * (lo + hi);
        if (ball_condition_holds(spec, M, gamma, mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

double solve_valuation(std::span<const Outcome> outcomes, const ValueFnSpec& spec) {
    spec.validate();
    if (outcomes.empty()) throw ConfigError("solve_valuation needs at least one outcome");
    double psum = 0.0, ymin = kInf, ymax = -kInf;
    for (const auto& o : outcomes) {
        psum += o.prob;
        ymin = std::min(ymin, o.value);
        ymax = std::max(ymax, o.value);
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw ConfigError("outcome probabilities must sum to 1");

    auto g = [&](double z) {
        double e = 0.0;
        for (const auto& o : outcomes) e += o.prob * eval(spec, o.value - z);
        return e - spec.v0;
    };
    // g is strictly decreasing in z for a strictly increasing value function
    double lo = ymin - 1.0, hi = ymax + 1.0;
    double glo = g(lo), ghi = g(hi);
    for (int grow = 0; grow < 60 && (glo < 0.0 || ghi > 0.0); ++grow) {
        if (glo < 0.0) { lo -= std::max(1.0, std::abs(lo)); glo = g(lo); }
        if (ghi > 0.0) { hi += std::max(1.0, std::abs(hi)); ghi = g(hi); }
    }
    if (glo < 0.0 || ghi > 0.0)
        throw MathError("valuation root not bracketed: value function not strictly increasing?");
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) >= 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace riskrl
