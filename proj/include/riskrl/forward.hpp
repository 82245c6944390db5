#pragma once

#include "riskrl/mdp.hpp"

#include <cstdint>
#include <optional>

namespace riskrl {

/// Fixed-point solver configuration shared by the Q and derivative solves.
/// alpha0 = 0 selects the automatic initial step min(1, 1/L_K) when the
/// Lipschitz constant on the solve ball is finite.
struct SolverConfig {
    double alpha0 = 0.0;
    double alpha_min = 1e-6;
    double shrink = 0.5;
    double grow = 1.1;
    int grow_period = 50;
    double tol = 1e-8;        ///< on ||TQ - Q||_inf
    long max_iters = 100000;
    std::optional<double> radius;  ///< ball radius K; defaults to find_admissible_K
    bool clip_to_ball = true;      ///< clamp iterates to [-K, K] when K is finite

    void validate() const;
};

struct SolveDiagnostics {
    long iterations = 0;
    double final_alpha = 0.0;
    double residual = 0.0;          ///< ||TQ - Q||_inf at exit
    double bellman_residual = 0.0;  ///< max |E vtilde(TD)| at exit
    double radius = 0.0;            ///< K used (inf when unconstrained)
    long clip_events = 0;
    int shrink_events = 0;
};

/// One application of the risk-sensitive operator:
/// (TQ)(x,a) = alpha E_{x',w}[vtilde(r + gamma max_a' Q(x',a') - Q(x,a))] + Q(x,a)
/// with the expectation enumerated exactly over the finite support.
/// Absorbing states stay pinned at 0.
QTable apply_T(const FiniteMDP& mdp, const ValueFnSpec& spec, const QTable& q, double alpha);

/// Iterates T with the adaptive step-size scheme (shrink on divergence,
/// periodic growth capped at 1) until ||TQ - Q||_inf < tol. Throws
/// SolverError on step-size underflow or iteration exhaustion.
QTable solve_q_fixed_point(const FiniteMDP& mdp, const ValueFnSpec& spec,
                           const SolverConfig& cfg, SolveDiagnostics* diag = nullptr,
                           const QTable* warm_start = nullptr);

/// Robbins-Monro step sizes alpha_t(x,a) = c / n_t(x,a)^omega; the omega
/// range keeps sum alpha = inf and sum alpha^2 < inf.
struct LearningRateSchedule {
    double c = 1.0;
    double omega = 0.8;  ///< in (0.5, 1]
    void validate() const;
};

struct QLearningOptions {
    double epsilon = 0.1;               ///< epsilon-greedy exploration
    const Policy* behavior = nullptr;   ///< fixed behavior policy instead
    std::optional<double> radius;       ///< clip iterates to [-K, K]
    int start_state = -1;               ///< -1: uniform over non-absorbing states
    int restart_period = 200;           ///< episode cap when nothing absorbs
};

/// Stochastic Q-learning on transformed temporal differences:
/// Q(x,a) += alpha_t(x,a) vtilde(r + gamma max_a' Q(x',a') - Q(x,a)).
/// Episodes restart from the start distribution when absorbed.
QTable q_learning(const FiniteMDP& mdp, const ValueFnSpec& spec,
                  const LearningRateSchedule& schedule, long n_steps,
                  std::uint64_t seed, const QLearningOptions& opts = {});

/// pi(a|x) proportional to exp(beta Q(x,a)) over admissible actions,
/// computed with a max shift.
Policy boltzmann_policy(const FiniteMDP& mdp, const QTable& q, double beta);

/// Point mass on the argmax admissible action; ties break to the lowest
/// action index.
Policy greedy_policy(const FiniteMDP& mdp, const QTable& q);

int greedy_action(const FiniteMDP& mdp, const QTable& q, int x);

} // namespace riskrl
