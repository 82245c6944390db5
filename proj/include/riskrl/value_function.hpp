#pragma once

#include <span>
#include <string>
#include <vector>

namespace riskrl {

/// Behavioral value-function families. Prospect is the piecewise-power map
/// of prospect theory, Linear the asymmetric linear map, Entropic the
/// exponential map normalized so v(y0) = 0, and LProspect the locally
/// Lipschitz prospect variant whose derivative stays bounded away from zero
/// at the reference point.
enum class ValueFamily { Prospect, Linear, Entropic, LProspect };

const char* family_name(ValueFamily f);
ValueFamily family_from_name(const std::string& name);

/// A value function v(y, theta) together with its reference point y0 and
/// acceptance level v0. Which numeric fields are meaningful depends on the
/// family; validate() enforces the per-family constraints.
struct ValueFnSpec {
    ValueFamily family = ValueFamily::Prospect;
    double k_minus = 1.0;     ///< loss scale (> 0)
    double k_plus = 1.0;      ///< gain scale (> 0)
    double zeta_minus = 1.0;  ///< loss curvature exponent (> 0)
    double zeta_plus = 1.0;   ///< gain curvature exponent (> 0)
    double lambda = 1.0;      ///< entropic coefficient (!= 0)
    double kappa = 0.0;       ///< linear-family asymmetry, |kappa| < 1
    double epsilon = 1e-2;    ///< L-prospect smoothing (> 0)
    double y0 = 0.0;          ///< reference point
    double v0 = 0.0;          ///< acceptance level

    /// Throws ConfigError when a family invariant is violated.
    void validate() const;

    /// Number of free parameters exposed to the inverse problem:
    /// 4 for Prospect/LProspect (k-, k+, zeta-, zeta+), 1 for Entropic
    /// (lambda), 1 for Linear (kappa).
    int free_param_count() const;
    std::vector<std::string> param_names() const;
    std::vector<double> params() const;
    void set_params(std::span<const double> theta);
};

/// Extremes of the shifted derivative D(v - v0) over an interval.
struct LipschitzBounds {
    double eps_K = 0.0;  ///< min of Dv on [lo, hi]
    double L_K = 0.0;    ///< max of Dv on [lo, hi]
    double lo = 0.0;
    double hi = 0.0;
};

/// v(y, theta) per the family's closed form.
double eval(const ValueFnSpec& spec, double y);

/// Shifted value vtilde(y) = v(y) - v0.
double eval_tilde(const ValueFnSpec& spec, double y);

/// Analytic derivative Dv(y). For the prospect family the reference point
/// is nondifferentiable unless both exponents are 1 and the scales agree
/// (throws MathError there); at y == y0 the gain-side branch is used where
/// one-sided limits exist.
double deriv_y(const ValueFnSpec& spec, double y);

/// d vtilde / d theta_i for each free parameter, in param_names() order.
std::vector<double> deriv_theta(const ValueFnSpec& spec, double y);
void deriv_theta(const ValueFnSpec& spec, double y, std::span<double> out);

/// Exact min/max of Dv over [lo, hi], evaluated per monotone derivative
/// branch (endpoints plus one-sided limits at y0). Throws MathError when
/// the supremum is infinite (prospect with zeta < 1 and y0 inside).
LipschitzBounds lipschitz_bounds(const ValueFnSpec& spec, double lo, double hi);

/// Minimum of Dv over [lo, hi]; finite even when the maximum is not.
double deriv_min_on(const ValueFnSpec& spec, double lo, double hi);

/// Fixed-point ball condition: max{|vt(M)|, |vt(-M)|}/(1-gamma) < K * eps_K
/// with eps_K = min Dv over I_K = [-M-K, M+K].
bool ball_condition_holds(const ValueFnSpec& spec, double M, double gamma, double K);

/// A radius K for which ball_condition_holds is true. Entropic returns
/// K = 1/|lambda| (and fails when lambda is outside its admissible range);
/// other families run a doubling search refined by bisection. Throws
/// SolverError when no admissible K exists.
double find_admissible_K(const ValueFnSpec& spec, double M, double gamma);

/// Admissibility threshold for the entropic coefficient:
/// |lambda| < (2M)^-1 W(2M(1-gamma)/e) guarantees K = 1/|lambda| works for
/// the unnormalized exponential map.
double entropic_lambda_bound(double M, double gamma);

/// Principal branch of the Lambert W function for x >= 0.
double lambert_w0(double x);

/// One outcome of a discrete random variable.
struct Outcome {
    double value = 0.0;
    double prob = 0.0;
};

/// The valuation induced by the acceptance set of v: the unique z with
/// E[v(Y - z)] = v0, found by bisection on [min Y - 1, max Y + 1] to 1e-10.
/// Serves as the independent optimality oracle for solved Q tables.
double solve_valuation(std::span<const Outcome> outcomes, const ValueFnSpec& spec);

} // namespace riskrl
