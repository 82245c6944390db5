#pragma once

// Property suites shared between the unit tests and the acceptance runner.
// Each suite returns the list of failed checks (empty means green) so the
// acceptance binary can time and report them as standalone criteria.

#include "test_support.hpp"

#include "riskrl/errors.hpp"
#include "riskrl/evaluation.hpp"
#include "riskrl/rng.hpp"
#include "riskrl/value_function.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace riskrl::testing {

inline std::vector<ValueFnSpec> representative_specs() {
    std::vector<ValueFnSpec> specs;
    specs.push_back(identity_spec());
    specs.push_back(prospect_spec(0.1, 1.0, 0.5, 1.5));
    specs.push_back(prospect_spec(5.0, 1.0, 1.5, 0.7));
    specs.push_back(lprospect_spec(0.1, 1.0, 0.5, 1.5));
    specs.push_back(lprospect_spec(5.0, 1.0, 1.1, 0.8));
    specs.push_back(entropic_spec(1.0));
    specs.push_back(entropic_spec(-1.0));
    specs.push_back(entropic_spec(0.01));
    specs.push_back(linear_spec(0.5));
    specs.push_back(linear_spec(-0.9));
    return specs;
}

inline ValueFnSpec random_spec_in_box(ValueFamily family, Rng& rng) {
    ValueFnSpec s;
    s.family = family;
    switch (family) {
        case ValueFamily::Prospect:
        case ValueFamily::LProspect:
            s.k_minus = rng.uniform(1e-2, 10.0);
            s.k_plus = rng.uniform(1e-2, 10.0);
            s.zeta_minus = rng.uniform(0.3, 2.0);
            s.zeta_plus = rng.uniform(0.3, 2.0);
            break;
        case ValueFamily::Entropic:
            s.lambda = rng.uniform(0.05, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
            break;
        case ValueFamily::Linear:
            s.kappa = rng.uniform(-0.9, 0.9);
            break;
    }
    return s;
}

/// Value-function suite: strict monotonicity on a dense grid, analytic
/// derivatives against central finite differences, and the pointwise
/// LProspect -> Prospect limit as epsilon decreases.
inline std::vector<std::string> value_function_suite() {
    std::vector<std::string> failures;
    auto fail = [&](const std::string& msg) { failures.push_back(msg); };

    // strict monotonicity: Dv > 0 at 1e4 grid points on [-100, 100] \ {y0}
    for (const auto& spec : representative_specs()) {
        for (int i = 0; i < 10000; ++i) {
            double y = -100.0 + 200.0 * i / 9999.0;
            if (std::abs(y - spec.y0) < 1e-9) continue;
            if (!(deriv_y(spec, y) > 0.0)) {
                std::ostringstream ss;
                ss << "Dv not positive for family " << family_name(spec.family) << " at y=" << y;
                fail(ss.str());
                break;
            }
        }
    }

    // derivative consistency at 100 random (y, theta) per family
    const ValueFamily families[] = {ValueFamily::Prospect, ValueFamily::Linear,
                                    ValueFamily::Entropic, ValueFamily::LProspect};
    Rng rng(91);
    for (ValueFamily fam : families) {
        for (int trial = 0; trial < 100; ++trial) {
            ValueFnSpec spec = random_spec_in_box(fam, rng);
            double y = rng.uniform(-10.0, 10.0);
            if (std::abs(y - spec.y0) < 1e-3) y += (y >= spec.y0 ? 1.0 : -1.0) * 2e-3;
            const double h = 1e-6;
            double fd = central_diff([&](double t) { return eval_tilde(spec, t); }, y, h);
            double an = deriv_y(spec, y);
            if (std::abs(fd - an) > 1e-5 * std::max(1.0, std::abs(an))) {
                std::ostringstream ss;
                ss << "deriv_y mismatch for " << family_name(fam) << " at y=" << y << ": analytic "
                   << an << " vs fd " << fd;
                fail(ss.str());
                break;
            }
            auto theta = spec.params();
            auto grad = deriv_theta(spec, y);
            bool ok = true;
            for (std::size_t k = 0; k < theta.size() && ok; ++k) {
                auto shifted = [&](double t) {
                    auto th = theta;
                    th[k] = t;
                    ValueFnSpec s2 = spec;
                    s2.set_params(th);
                    return eval_tilde(s2, y);
                };
                double fdk = central_diff(shifted, theta[k], h);
                if (std::abs(fdk - grad[k]) > 1e-5 * std::max(1.0, std::abs(grad[k]))) {
                    std::ostringstream ss;
                    ss << "deriv_theta[" << k << "] mismatch for " << family_name(fam)
                       << " at y=" << y << ": analytic " << grad[k] << " vs fd " << fdk;
                    fail(ss.str());
                    ok = false;
                }
            }
            if (!ok) break;
        }
    }

    // LProspect -> Prospect pointwise, monotone in epsilon at fixed y != y0
    {
        ValueFnSpec p = prospect_spec(2.0, 1.0, 0.9, 0.7);
        const double eps_seq[] = {1e-1, 1e-2, 1e-3};
        const double ys[] = {-3.0, -0.5, 0.4, 2.5};
        for (double y : ys) {
            double prev_gap = -1.0;
            for (double eps : eps_seq) {
                ValueFnSpec lp = lprospect_spec(p.k_minus, p.k_plus, p.zeta_minus, p.zeta_plus, eps);
                double gap = std::abs(eval(lp, y) - eval(p, y));
                if (prev_gap >= 0.0 && gap > prev_gap + 1e-12) {
                    std::ostringstream ss;
                    ss << "lprospect gap not decreasing in epsilon at y=" << y;
                    fail(ss.str());
                }
                prev_gap = gap;
            }
            if (prev_gap > 1e-2) {
                std::ostringstream ss;
                ss << "lprospect gap too large at smallest epsilon, y=" << y;
                fail(ss.str());
            }
        }
    }
    return failures;
}

/// Risk-measure suite: translation invariance and monotonicity of the
/// acceptance-set valuation.
inline std::vector<std::string> risk_measure_suite() {
    std::vector<std::string> failures;
    auto fail = [&](const std::string& msg) { failures.push_back(msg); };

    std::vector<ValueFnSpec> specs = {identity_spec(), entropic_spec(0.5), entropic_spec(-0.5),
                                      lprospect_spec(5.0, 1.0, 1.1, 0.8), linear_spec(0.3)};
    Rng rng(417);
    for (const auto& spec : specs) {
        for (int trial = 0; trial < 40; ++trial) {
            int n = 2 + rng.below(4);
            std::vector<Outcome> y(n);
            double psum = 0.0;
            for (auto& o : y) {
                o.value = rng.uniform(-4.0, 4.0);
                o.prob = rng.uniform(0.05, 1.0);
                psum += o.prob;
            }
            for (auto& o : y) o.prob /= psum;
            double base = solve_valuation(y, spec);

            double m = rng.uniform(-5.0, 5.0);
            auto shifted = y;
            for (auto& o : shifted) o.value += m;
            if (std::abs(solve_valuation(shifted, spec) - (base + m)) > 1e-9) {
                fail(std::string("translation invariance violated for ") +
                     family_name(spec.family));
                break;
            }

            auto dominated = y;
            for (auto& o : dominated) o.value += rng.uniform(0.0, 2.0);
            if (solve_valuation(dominated, spec) < base - 1e-9) {
                fail(std::string("monotonicity violated for ") + family_name(spec.family));
                break;
            }
        }
    }
    return failures;
}

/// Metric suite: TV metric axioms, Gibbs/Pinsker dominance, and the DKW
/// bound checked against Monte Carlo resampling.
inline std::vector<std::string> metrics_suite() {
    std::vector<std::string> failures;
    auto fail = [&](const std::string& msg) { failures.push_back(msg); };
    Rng rng(5309);

    auto random_simplex = [&](int n) {
        std::vector<double> p(n);
        double s = 0.0;
        for (double& v : p) {
            v = -std::log(1.0 - rng.uniform());
            s += v;
        }
        for (double& v : p) v /= s;
        return p;
    };

    // TV is a metric on the simplex
    for (int trial = 0; trial < 2000; ++trial) {
        int n = 2 + rng.below(6);
        auto p = random_simplex(n), q = random_simplex(n), r = random_simplex(n);
        double dpq = tv_distance(p, q), dqp = tv_distance(q, p);
        if (std::abs(dpq - dqp) > 1e-15) { fail("tv not symmetric"); break; }
        if (dpq < 0.0 || dpq > 1.0 + 1e-15) { fail("tv out of range"); break; }
        if (tv_distance(p, p) > 1e-12) { fail("tv(p,p) != 0"); break; }
        if (dpq > tv_distance(p, r) + tv_distance(r, q) + 1e-12) {
            fail("tv triangle inequality violated");
            break;
        }
    }

    // Pinsker dominance and Gibbs nonnegativity on 1e4 random pairs
    for (int trial = 0; trial < 10000; ++trial) {
        int n = 2 + rng.below(6);
        auto p = random_simplex(n), q = random_simplex(n);
        double kl = kl_divergence(p, q);
        if (kl < -1e-12) { fail("kl negative"); break; }
        if (tv_distance(p, q) > pinsker_bound(kl) + 1e-12) {
            fail("pinsker bound violated");
            break;
        }
    }

    // DKW: monotone in n, and empirical exceedance stays below nu
    if (!(dkw_bound(100, 8, 0.05) > dkw_bound(1000, 8, 0.05))) fail("dkw not monotone in n");
    {
        const int actions = 4, n = 1000, resamples = 1000;
        const double nu = 0.05;
        auto pi = random_simplex(actions);
        const double eps_nu = dkw_bound_tight(n, actions, nu);
        int exceed = 0;
        for (int rep = 0; rep < resamples; ++rep) {
            std::vector<double> counts(actions, 0.0);
            for (int i = 0; i < n; ++i)
                counts[rng.sample_index(actions, [&](int a) { return pi[a]; })] += 1.0;
            double l1 = 0.0;
            for (int a = 0; a < actions; ++a) l1 += std::abs(counts[a] / n - pi[a]);
            if (l1 > eps_nu) ++exceed;
        }
        if (exceed > nu * resamples)
            fail("empirical DKW exceedance rate above nu");
    }

    // composite policy-recovery bound: triangle instantiation with the
    // printed DKW term replacing the sampling error
    for (int trial = 0; trial < 200; ++trial) {
        const int actions = 8, n = 500;
        auto pi = random_simplex(actions);
        auto pi_theta = random_simplex(actions);
        std::vector<double> counts(actions, 0.0);
        for (int i = 0; i < n; ++i)
            counts[rng.sample_index(actions, [&](int a) { return pi[a]; })] += 1.0;
        std::vector<double> pi_hat(actions);
        for (int a = 0; a < actions; ++a) pi_hat[a] = counts[a] / n;
        double lhs = tv_distance(pi_theta, pi);
        double rhs = dkw_bound(n, actions, 0.01) + tv_distance(pi_hat, pi_theta);
        if (lhs > rhs + 1e-12) {
            fail("composite DKW + training-error bound violated");
            break;
        }
    }
    return failures;
}

} // namespace riskrl::testing
