#pragma once

#include "riskrl/value_function.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace riskrl {

/// One point of a discrete reward distribution. The disturbance index w is
/// the position in the per-(x,a) list.
struct RewardEntry {
    double prob = 0.0;
    double r = 0.0;
};

/// Finite MDP with per-state admissible actions, a row-stochastic transition
/// kernel and a discrete random reward per (x, a). Rewards and next states
/// are drawn from the product measure P(x'|x,a) * P_r(w|x,a), matching the
/// expectation used by the solvers. Immutable after construction in normal
/// use; safe to share across threads.
struct FiniteMDP {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<int>> admissible;                  ///< per state, sorted
    std::vector<double> transition;                            ///< [x][a][x'] dense row-major
    std::vector<std::vector<std::vector<RewardEntry>>> rewards;///< [x][a] -> outcomes
    double gamma = 0.95;
    std::vector<std::uint8_t> absorbing;                       ///< flag per state
    std::vector<std::string> state_labels;                     ///< optional
    std::vector<std::string> action_labels;                    ///< optional

    double p(int x, int a, int x2) const {
        return transition[(static_cast<std::size_t>(x) * n_actions + a) * n_states + x2];
    }
    double& p(int x, int a, int x2) {
        return transition[(static_cast<std::size_t>(x) * n_actions + a) * n_states + x2];
    }
    bool is_absorbing(int x) const { return absorbing[x] != 0; }

    /// M = max |r| over all reward entries.
    double reward_bound() const;

    void allocate(int states, int actions);
};

/// Checks every structural invariant; throws ConfigError with a diagnostic
/// listing every violation found.
void validate(const FiniteMDP& mdp);

/// Stochastic policy pi(a|x); zero mass on inadmissible actions.
struct Policy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> probs;

    Policy() = default;
    Policy(int states, int actions)
        : n_states(states), n_actions(actions),
          probs(static_cast<std::size_t>(states) * actions, 0.0) {}

    double at(int x, int a) const { return probs[static_cast<std::size_t>(x) * n_actions + a]; }
    double& at(int x, int a) { return probs[static_cast<std::size_t>(x) * n_actions + a]; }
};

void validate_policy(const FiniteMDP& mdp, const Policy& pi);

/// Action-value table plus the value-function spec it was solved under.
struct QTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> values;
    ValueFnSpec spec;

    QTable() = default;
    QTable(int states, int actions)
        : n_states(states), n_actions(actions),
          values(static_cast<std::size_t>(states) * actions, 0.0) {}

    double at(int x, int a) const { return values[static_cast<std::size_t>(x) * n_actions + a]; }
    double& at(int x, int a) { return values[static_cast<std::size_t>(x) * n_actions + a]; }

    /// max over admissible actions at x.
    double max_admissible(const FiniteMDP& mdp, int x) const;
};

/// One simulated transition.
struct Step {
    int x = 0;
    int a = 0;
    int w = 0;      ///< index into the reward distribution of (x, a)
    double r = 0.0;
    int next = 0;
};

/// Follows pi through the kernel until an absorbing state or max_steps.
/// Starting in an absorbing state yields an empty trajectory. Deterministic
/// given the seed.
std::vector<Step> simulate(const FiniteMDP& mdp, const Policy& pi, int start,
                           int max_steps, std::uint64_t seed);

/// Demonstrations: episodes of (x, a) pairs plus the derived counts.
struct DemonstrationSet {
    std::vector<std::vector<std::pair<int, int>>> episodes;
    std::vector<double> counts;  ///< n(x, a), dense [x][a]
    int n_states = 0;
    int n_actions = 0;
    long total = 0;              ///< N = total pairs

    double count(int x, int a) const { return counts[static_cast<std::size_t>(x) * n_actions + a]; }
    double weight(int x, int a) const { return total > 0 ? count(x, a) / total : 0.0; }
    double state_count(int x) const;

    /// Recomputes counts/total from episodes (used after file loads).
    void rebuild_counts(int states, int actions);
};

std::vector<double> uniform_start_dist(const FiniteMDP& mdp);

DemonstrationSet sample_demonstrations(const FiniteMDP& mdp, const Policy& pi,
                                       int n_episodes,
                                       const std::vector<double>& start_dist,
                                       int max_steps, std::uint64_t seed);

/// Empirical policy on visited states; `visited[x]` marks which rows of the
/// returned policy are populated (unvisited states carry no distribution).
struct EmpiricalPolicy {
    Policy policy;
    std::vector<std::uint8_t> visited;
};

EmpiricalPolicy empirical_policy(const DemonstrationSet& demos);

} // namespace riskrl
