#pragma once

// Shared helpers for the test suites: tiny MDP builders, value-function
// spec shorthands, and finite-difference oracles. Everything here is
// test-only and independent of the solver paths it is used to check.

#include "riskrl/environments.hpp"
#include "riskrl/forward.hpp"
#include "riskrl/mdp.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace riskrl::testing {

inline std::string data_path(const std::string& name) {
    return std::string(RISKRL_DATA_DIR) + "/" + name;
}

inline ValueFnSpec identity_spec() {
    ValueFnSpec s;
    s.family = ValueFamily::Prospect;
    return s;
}

inline ValueFnSpec prospect_spec(double km, double kp, double zm, double zp) {
    ValueFnSpec s;
    s.family = ValueFamily::Prospect;
    s.k_minus = km;
    s.k_plus = kp;
    s.zeta_minus = zm;
    s.zeta_plus = zp;
    return s;
}

inline ValueFnSpec lprospect_spec(double km, double kp, double zm, double zp,
                                  double eps = 1e-2) {
    ValueFnSpec s = prospect_spec(km, kp, zm, zp);
    s.family = ValueFamily::LProspect;
    s.epsilon = eps;
    return s;
}

inline ValueFnSpec entropic_spec(double lambda) {
    ValueFnSpec s;
    s.family = ValueFamily::Entropic;
    s.lambda = lambda;
    return s;
}

inline ValueFnSpec linear_spec(double kappa) {
    ValueFnSpec s;
    s.family = ValueFamily::Linear;
    s.kappa = kappa;
    return s;
}

/// Single state, single action, self-loop with the given reward outcomes.
inline FiniteMDP single_state_mdp(const std::vector<RewardEntry>& outcomes, double gamma) {
    FiniteMDP mdp;
    mdp.allocate(1, 1);
    mdp.gamma = gamma;
    mdp.admissible[0] = {0};
    mdp.p(0, 0, 0) = 1.0;
    mdp.rewards[0][0] = outcomes;
    return mdp;
}

/// Two-armed bandit: arm 0 pays `safe` deterministically, arm 1 pays +/-1
/// with probability 1/2 each.
inline FiniteMDP two_armed_bandit(double safe, double gamma) {
    FiniteMDP mdp;
    mdp.allocate(1, 2);
    mdp.gamma = gamma;
    mdp.admissible[0] = {0, 1};
    mdp.p(0, 0, 0) = 1.0;
    mdp.p(0, 1, 0) = 1.0;
    mdp.rewards[0][0] = {RewardEntry{1.0, safe}};
    mdp.rewards[0][1] = {RewardEntry{0.5, 1.0}, RewardEntry{0.5, -1.0}};
    return mdp;
}

/// Deterministic chain 0 -> 1 -> ... -> n-1 (absorbing), each step pays r.
inline FiniteMDP chain_mdp(int n, double r, double gamma) {
    FiniteMDP mdp;
    mdp.allocate(n, 1);
    mdp.gamma = gamma;
    for (int x = 0; x < n; ++x) {
        mdp.admissible[x] = {0};
        if (x + 1 < n) {
            mdp.p(x, 0, x + 1) = 1.0;
            mdp.rewards[x][0] = {RewardEntry{1.0, r}};
        } else {
            mdp.absorbing[x] = 1;
            mdp.p(x, 0, x) = 1.0;
            mdp.rewards[x][0] = {RewardEntry{1.0, 0.0}};
        }
    }
    return mdp;
}

inline GridSpec default_grid() { return load_grid_map_file(data_path("gridworld.map")); }

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Classical Bellman value iteration over expected rewards; the independent
/// oracle for the risk-neutral reduction. Absorbing states stay at 0.
inline QTable value_iteration_oracle(const FiniteMDP& mdp, double tol = 1e-12,
                                     int max_iters = 200000) {
    QTable q(mdp.n_states, mdp.n_actions);
    std::vector<double> er(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
    for (int x = 0; x < mdp.n_states; ++x)
        for (int a : mdp.admissible[x]) {
            double m = 0.0;
            for (const auto& e : mdp.rewards[x][a]) m += e.prob * e.r;
            er[static_cast<std::size_t>(x) * mdp.n_actions + a] = m;
        }
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        QTable next = q;
        for (int x = 0; x < mdp.n_states; ++x) {
            if (mdp.is_absorbing(x)) continue;
            for (int a : mdp.admissible[x]) {
                double v = er[static_cast<std::size_t>(x) * mdp.n_actions + a];
                for (int x2 = 0; x2 < mdp.n_states; ++x2) {
                    double p = mdp.p(x, a, x2);
                    if (p > 0.0) v += mdp.gamma * p * q.max_admissible(mdp, x2);
                }
                delta = std::max(delta, std::abs(v - q.at(x, a)));
                next.at(x, a) = v;
            }
        }
        q = next;
        if (delta < tol) break;
    }
    return q;
}

} // namespace riskrl::testing
