#pragma once

#include "riskrl/forward.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace riskrl {

/// Parameter-derivative table phi(x,a) = D_theta Q*(x,a), one entry per free
/// parameter of the family, evaluated at `spec`.
struct DQTable {
    int n_states = 0;
    int n_actions = 0;
    int dim = 0;
    std::vector<double> values;  ///< [x][a][k]
    ValueFnSpec spec;

    DQTable() = default;
    DQTable(int states, int actions, int d)
        : n_states(states), n_actions(actions), dim(d),
          values(static_cast<std::size_t>(states) * actions * d, 0.0) {}

    double at(int x, int a, int k) const {
        return values[(static_cast<std::size_t>(x) * n_actions + a) * dim + k];
    }
    double& at(int x, int a, int k) {
        return values[(static_cast<std::size_t>(x) * n_actions + a) * dim + k];
    }
};

/// One application of the derivative operator S:
/// (S phi)(x,a) = alpha E_{x',w}[D2 vt(y) + D1 vt(y)(gamma phi(x',a*) - phi(x,a))] + phi(x,a)
/// where y is the temporal difference at the solved Q* and a* the greedy
/// action at x' (ties to the lowest index). Absorbing rows stay 0.
DQTable apply_S(const FiniteMDP& mdp, const ValueFnSpec& spec, const QTable& qstar,
                const DQTable& phi, double alpha);

/// Fixed point of S, solved with the same adaptive step-size machinery as
/// the forward solver. `qstar` must be solved at `spec` to at least cfg.tol.
/// diag->tie_events counts greedy ties within 1e-9 (the measure-zero set
/// where the gradient may fail to exist).
struct DQDiagnostics : SolveDiagnostics {
    long tie_events = 0;
};
DQTable solve_dq_fixed_point(const FiniteMDP& mdp, const ValueFnSpec& spec,
                             const QTable& qstar, const SolverConfig& cfg,
                             DQDiagnostics* diag = nullptr,
                             const DQTable* warm_start = nullptr);

/// Chain rule through the Boltzmann map:
/// D pi(a|x) = pi(a|x) beta (phi(x,a) - sum_a' pi(a'|x) phi(x,a')).
/// Returned layout matches DQTable ([x][a][k]).
std::vector<double> policy_derivative(const FiniteMDP& mdp, const Policy& pi,
                                      const DQTable& phi, double beta);

/// Negative weighted log-likelihood of the demonstrated pairs:
/// l = -sum w(x,a) log pi(a|x).
double loss_nll(const Policy& pi, const DemonstrationSet& demos);

/// Sum over distinct visited states of KL(pi_hat(.|x) || pi(.|x)).
double loss_kl(const Policy& pi, const DemonstrationSet& demos);

enum class LossKind { NLL, KL };

/// Full analytic gradient of the loss at theta = spec's parameters:
/// forward solve, derivative solve, policy derivative, outer derivative.
std::vector<double> loss_gradient(const FiniteMDP& mdp, const ValueFnSpec& spec,
                                  const DemonstrationSet& demos, double beta,
                                  LossKind kind, const SolverConfig& solver);

struct IRLConfig {
    int restarts = 5;
    /// per-parameter [lo, hi]; empty selects the family default box
    std::vector<std::array<double, 2>> param_box;
    int max_outer_iters = 100;
    double loss_tol = 1e-6;      ///< stop when |l - l_prev| < loss_tol
    double armijo_c1 = 1e-4;
    double backtrack_shrink = 0.5;
    LossKind loss = LossKind::NLL;
    double beta = 4.0;           ///< Boltzmann inverse temperature (fixed, not fitted)
    SolverConfig solver;         ///< inner fixed-point solves

    void validate() const;
};

std::vector<std::array<double, 2>> default_param_box(ValueFamily family);

struct RestartResult {
    std::vector<double> theta_init;
    std::vector<double> theta_final;
    std::vector<double> loss_trace;
    bool converged = false;
    bool failed = false;  ///< inner solver failed at the initial point
};

struct IRLResult {
    std::vector<RestartResult> restarts;
    int best_restart = -1;
    std::vector<double> best_theta;
    double best_loss = 0.0;
    ValueFnSpec best_spec;
    Policy best_policy;
};

/// Projected gradient descent with Armijo backtracking line search and
/// random restarts (restart k draws its start from seed + k). Returns the
/// restart with the lowest final loss; throws SolverError when every
/// restart fails.
IRLResult irl_fit(const FiniteMDP& mdp, const DemonstrationSet& demos,
                  ValueFamily family, const IRLConfig& cfg, std::uint64_t seed);

} // namespace riskrl
