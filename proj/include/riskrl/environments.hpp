#pragma once

#include "riskrl/mdp.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace riskrl {

/// Grid World map legend: S start, G +1 absorbing, B -1 absorbing,
/// g -0.1 cell, . +0.1 cell.
struct GridSpec {
    std::vector<std::string> map;
    double slip = 0.01;           ///< probability of each unintended direction
    double intended_prob = 0.93;  ///< probability of the chosen direction
    double gamma = 0.95;
    /// Recurring (default): the literal "reward for being in the state"
    /// reading; every cell pays its legend reward each step, G/B self-loop
    /// forever, and nothing terminates. Entry: rewards attach to the
    /// destination cell, G/B absorb and pay 0 after the entry step. Entry
    /// keeps ||Q|| small but makes the +0.1 living reward (worth
    /// 0.1/(1-gamma) = 2 at gamma = 0.95) beat the +1 goal, so goal-seeking
    /// behavior needs the recurring reading.
    enum class AbsorbingRewardMode { Entry, Recurring };
    AbsorbingRewardMode absorbing_reward_mode = AbsorbingRewardMode::Recurring;

    int rows() const { return static_cast<int>(map.size()); }
    int cols() const { return map.empty() ? 0 : static_cast<int>(map[0].size()); }
    int start_state() const;  ///< index of the S cell
    void validate() const;
};

GridSpec load_grid_map(std::istream& in);
GridSpec load_grid_map_file(const std::string& path);

/// The 8 compass actions in order N, NE, E, SE, S, SW, W, NW. Moves that
/// would leave the grid get probability zero and the remaining directions
/// are re-weighted proportionally. Rewards are paid on entering a cell.
FiniteMDP build_gridworld(const GridSpec& spec);

constexpr int kGridActions = 8;
extern const std::array<const char*, kGridActions> kGridActionNames;

/// One surge-price sample.
struct SurgeRow {
    long long timestamp = 0;  ///< epoch seconds
    double multiplier = 1.0;
};

std::vector<SurgeRow> read_surge_csv(std::istream& in);

/// Empirical 4x4 price-level transition matrix. Prices bin as
/// [1.0,1.2) -> 1.0, [1.2,1.6) -> 1.4, [1.6,2.0) -> 1.8, else 2.2.
/// Consecutive pairs are counted only within contiguous runs: a gap larger
/// than max_gap_seconds breaks the chain (the source data is sliced per
/// hour across days, so cross-slice pairs are not real transitions).
/// Rows with no observations become uniform.
std::array<std::array<double, 4>, 4>
ingest_surge_csv(const std::vector<SurgeRow>& rows, long long max_gap_seconds = 360);

int price_bin(double multiplier);

/// Ride-sharing passenger MDP configuration. Travel time is in seconds and
/// is converted to minutes for the per-minute price term. Pricing constants
/// have documented defaults but are ordinary configuration, not ground truth.
struct RideshareConfig {
    std::vector<double> price_levels{1.0, 1.4, 1.8, 2.2};
    int horizon = 12;               ///< T_f; at t = T_f only 'ride' is admissible
    double wait_reward = -0.5;      ///< \bar{r} < 0
    double satisfaction0 = 25.0;    ///< S_0
    double satisfaction_step = 0.5; ///< linear decrease per step
    double p_base = 1.15;
    double p_mile = 1.02;
    double p_min = 0.17;
    double distance_miles = 8.0;
    double travel_loc = 2371.0;     ///< truncated-normal location, seconds
    double travel_scale = 100.0;
    double travel_lower = 1554.0;
    double travel_upper = 3619.0;
    int time_bins = 32;
    double gamma = 0.95;

    void validate() const;
};

/// Actions of the rideshare MDP.
enum : int { kActionWait = 0, kActionRide = 1 };

/// States are (price level, t) for t = 0..T_f plus a terminal completed-ride
/// state; 'wait' pays wait_reward and advances the price by the matrix,
/// 'ride' pays S_t - x_t (p_base + p_mile D + p_min Z/60) with Z discretized
/// into equal-probability quantile bins, and moves to the terminal state.
FiniteMDP build_rideshare(const RideshareConfig& cfg,
                          const std::array<std::array<double, 4>, 4>& price_transition);

int rideshare_state(const RideshareConfig& cfg, int price_level, int t);
int rideshare_terminal_state(const RideshareConfig& cfg);

/// Midpoint-quantile discretization of a truncated normal: n values at the
/// quantiles (j + 1/2)/n, each with probability 1/n.
std::vector<double> truncated_normal_bins(double loc, double scale, double lower,
                                          double upper, int n);

/// Standard normal CDF and its inverse (bisection-refined, ~1e-14).
double normal_cdf(double x);
double normal_quantile(double p);

} // namespace riskrl
