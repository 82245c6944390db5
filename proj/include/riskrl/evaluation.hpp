#pragma once

#include "riskrl/inverse.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace riskrl {

/// Total variation distance: half the L1 distance between distributions of
/// equal support size.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// KL divergence sum p log(p/q) with 0 log 0 = 0. Throws MathError when q
/// vanishes where p does not.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Pinsker upper bound on TV: sqrt(2 KL).
double pinsker_bound(double kl);

/// High-probability bound on the empirical-policy L1 error, exactly as the
/// per-state tail inversion prints it: |A| sqrt((2/n) log(2|A|/nu)).
double dkw_bound(long n, int action_count, double nu);

/// Same inversion with the standard 1/(2n) constant.
double dkw_bound_tight(long n, int action_count, double nu);

/// Per-state TV distances between two policies plus their mean and
/// (population) variance across all states.
struct TVReport {
    std::vector<int> states;
    std::vector<double> per_state;
    double mean = 0.0;
    double variance = 0.0;
};

TVReport policy_tv_report(const FiniteMDP& mdp, const Policy& pi_true,
                          const Policy& pi_learned);

/// Behavior signature: repeatedly take the most probable action, then the
/// most probable successor, until an absorbing state or max_len states.
/// Ties break to the lowest index.
std::vector<int> max_likelihood_path(const FiniteMDP& mdp, const Policy& pi, int start,
                                     int max_len = 100);

struct SweepPoint {
    long size = 0;
    double mean_tv = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double fit_a = 0.0;  ///< power-law coefficient in y = a x^b
    double fit_b = 0.0;  ///< power-law exponent
};

struct SweepConfig {
    int datasets_per_size = 5;
    IRLConfig irl;
    int max_episode_steps = 200;
    int start_state = -1;  ///< -1: uniform over non-absorbing states
    int threads = 0;       ///< 0: hardware concurrency
    std::optional<ValueFamily> fit_family;  ///< defaults to the truth's family
};

/// Sample-complexity experiment: for each dataset size, draw datasets from
/// the true agent's Boltzmann policy, fit the value function, and record the
/// mean TV against the true policy; 95% normal-approximation intervals
/// across datasets and an ordinary least-squares power-law fit in log-log
/// space.
SweepResult sample_complexity_experiment(const FiniteMDP& mdp, const ValueFnSpec& true_spec,
                                         const std::vector<long>& sizes,
                                         const SweepConfig& cfg, std::uint64_t seed);

/// Least-squares fit of log y = log a + b log x. Exposed for testing.
std::pair<double, double> fit_power_law(std::span<const double> x, std::span<const double> y);

} // namespace riskrl
