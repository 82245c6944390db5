#include "riskrl/mdp.hpp"
#include "riskrl/errors.hpp"
#include "riskrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace riskrl {

void FiniteMDP::allocate(int states, int actions) {
    n_states = states;
    n_actions = actions;
    admissible.assign(states, {});
    transition.assign(static_cast<std::size_t>(states) * actions * states, 0.0);
    rewards.assign(states, std::vector<std::vector<RewardEntry>>(actions));
    absorbing.assign(states, 0);
}

double FiniteMDP::reward_bound() const {
    double m = 0.0;
    for (const auto& per_state : rewards)
        for (const auto& dist : per_state)
            for (const auto& e : dist) m = std::max(m, std::abs(e.r));
    return m;
}

double QTable::max_admissible(const FiniteMDP& mdp, int x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int a : mdp.admissible[x]) best = std::max(best, at(x, a));
    return best;
}

void validate(const FiniteMDP& mdp) {
    std::ostringstream bad;
    auto report = [&](const std::string& msg) { bad << "  - " << msg << "\n"; };

    if (mdp.n_states <= 0 || mdp.n_actions <= 0) report("empty state or action set");
    if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0)) report("gamma must lie in [0, 1)");
    if (static_cast<int>(mdp.admissible.size()) != mdp.n_states ||
        static_cast<int>(mdp.rewards.size()) != mdp.n_states ||
        static_cast<int>(mdp.absorbing.size()) != mdp.n_states ||
        mdp.transition.size() !=
            static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * mdp.n_states) {
        throw ConfigError("invalid MDP: container sizes inconsistent with n_states/n_actions");
    }

    for (int x = 0; x < mdp.n_states; ++x) {
        if (mdp.admissible[x].empty()) report("state " + std::to_string(x) + " has no admissible action");
        for (int a : mdp.admissible[x]) {
            if (a < 0 || a >= mdp.n_actions) {
                report("state " + std::to_string(x) + " lists invalid action " + std::to_string(a));
                continue;
            }
            double rowsum = 0.0;
            for (int x2 = 0; x2 < mdp.n_states; ++x2) {
                double p = mdp.p(x, a, x2);
                if (p < 0.0)
                    report("negative transition probability at (x=" + std::to_string(x) +
                           ", a=" + std::to_string(a) + ", x'=" + std::to_string(x2) + ")");
                rowsum += p;
            }
            if (std::abs(rowsum - 1.0) > 1e-12)
                report("transition row (x=" + std::to_string(x) + ", a=" + std::to_string(a) +
                       ") sums to " + std::to_string(rowsum));

            const auto& dist = mdp.rewards[x][a];
            if (dist.empty()) {
                report("reward distribution empty at (x=" + std::to_string(x) +
                       ", a=" + std::to_string(a) + ")");
            } else {
                double psum = 0.0;
                for (const auto& e : dist) {
                    if (e.prob < 0.0)
                        report("negative reward probability at (x=" + std::to_string(x) +
                               ", a=" + std::to_string(a) + ")");
                    psum += e.prob;
                }
                if (std::abs(psum - 1.0) > 1e-12)
                    report("reward probabilities at (x=" + std::to_string(x) + ", a=" +
                           std::to_string(a) + ") sum to " + std::to_string(psum));
            }
            if (mdp.is_absorbing(x)) {
                if (std::abs(mdp.p(x, a, x) - 1.0) > 1e-12)
                    report("absorbing state " + std::to_string(x) + " does not self-loop under action " +
                           std::to_string(a));
                for (const auto& e : dist)
                    if (e.r != 0.0)
                        report("absorbing state " + std::to_string(x) + " pays nonzero reward");
            }
        }
    }
    if (mdp.reward_bound() <= 0.0) report("reward bound M must be positive");

    if (bad.tellp() > 0) throw ConfigError("invalid MDP:\n" + bad.str());
}

void validate_policy(const FiniteMDP& mdp, const Policy& pi) {
    if (pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions)
        throw ConfigError("policy shape does not match MDP");
    for (int x = 0; x < mdp.n_states; ++x) {
        double rowsum = 0.0;
        std::vector<bool> adm(mdp.n_actions, false);
        for (int a : mdp.admissible[x]) adm[a] = true;
        for (int a = 0; a < mdp.n_actions; ++a) {
            double p = pi.at(x, a);
            if (p < 0.0) throw ConfigError("negative policy probability at state " + std::to_string(x));
            if (!adm[a] && p != 0.0)
                throw ConfigError("policy puts mass on inadmissible action " + std::to_string(a) +
                                  " at state " + std::to_string(x));
            rowsum += p;
        }
        if (std::abs(rowsum - 1.0) > 1e-12)
            throw ConfigError("policy row " + std::to_string(x) + " sums to " + std::to_string(rowsum));
    }
}

namespace {

int sample_action(const FiniteMDP& mdp, const Policy& pi, int x, Rng& rng) {
    const auto& adm = mdp.admissible[x];
    int idx = rng.sample_index(static_cast<int>(adm.size()),
                               [&](int i) { return pi.at(x, adm[i]); });
    return adm[idx];
}

int sample_next(const FiniteMDP& mdp, int x, int a, Rng& rng) {
    return rng.sample_index(mdp.n_states, [&](int x2) { return mdp.p(x, a, x2); });
}

int sample_reward(const FiniteMDP& mdp, int x, int a, Rng& rng) {
    const auto& dist = mdp.rewards[x][a];
    return rng.sample_index(static_cast<int>(dist.size()),
                            [&](int i) { return dist[i].prob; });
}

} // namespace

std::vector<Step> simulate(const FiniteMDP& mdp, const Policy& pi, int start,
                           int max_steps, std::uint64_t seed) {
    if (start < 0 || start >= mdp.n_states) throw ConfigError("simulate: start state out of range");
    Rng rng(seed);
    std::vector<Step> traj;
    int x = start;
    for (int t = 0; t < max_steps && !mdp.is_absorbing(x); ++t) {
        int a = sample_action(mdp, pi, x, rng);
        int w = sample_reward(mdp, x, a, rng);
        int x2 = sample_next(mdp, x, a, rng);
        traj.push_back(Step{x, a, w, mdp.rewards[x][a][w].r, x2});
        x = x2;
    }
    return traj;
}

double DemonstrationSet::state_count(int x) const {
    double n = 0.0;
    for (int a = 0; a < n_actions; ++a) n += count(x, a);
    return n;
}

void DemonstrationSet::rebuild_counts(int states, int actions) {
    n_states = states;
    n_actions = actions;
    counts.assign(static_cast<std::size_t>(states) * actions, 0.0);
    total = 0;
    for (const auto& ep : episodes)
        for (auto [x, a] : ep) {
            counts[static_cast<std::size_t>(x) * actions + a] += 1.0;
            ++total;
        }
}

std::vector<double> uniform_start_dist(const FiniteMDP& mdp) {
    std::vector<double> d(mdp.n_states, 0.0);
    int live = 0;
    for (int x = 0; x < mdp.n_states; ++x)
        if (!mdp.is_absorbing(x)) ++live;
    for (int x = 0; x < mdp.n_states; ++x)
        if (!mdp.is_absorbing(x)) d[x] = 1.0 / live;
    return d;
}

DemonstrationSet sample_demonstrations(const FiniteMDP& mdp, const Policy& pi,
                                       int n_episodes,
                                       const std::vector<double>& start_dist,
                                       int max_steps, std::uint64_t seed) {
    if (static_cast<int>(start_dist.size()) != mdp.n_states)
        throw ConfigError("start distribution size does not match MDP");
    DemonstrationSet demos;
    demos.n_states = mdp.n_states;
    demos.n_actions = mdp.n_actions;
    demos.counts.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
    Rng rng(seed);
    for (int e = 0; e < n_episodes; ++e) {
        int start = rng.sample_index(mdp.n_states, [&](int x) { return start_dist[x]; });
        auto traj = simulate(mdp, pi, start, max_steps, rng.next_u64());
        std::vector<std::pair<int, int>> ep;
        ep.reserve(traj.size());
        for (const auto& s : traj) {
            ep.emplace_back(s.x, s.a);
            demos.counts[static_cast<std::size_t>(s.x) * mdp.n_actions + s.a] += 1.0;
            ++demos.total;
        }
        demos.episodes.push_back(std::move(ep));
    }
    return demos;
}

EmpiricalPolicy empirical_policy(const DemonstrationSet& demos) {
    if (demos.total == 0) throw ConfigError("empirical_policy: empty demonstration set");
    EmpiricalPolicy out;
    out.policy = Policy(demos.n_states, demos.n_actions);
    out.visited.assign(demos.n_states, 0);
    for (int x = 0; x < demos.n_states; ++x) {
        double nx = demos.state_count(x);
        if (nx <= 0.0) continue;
        out.visited[x] = 1;
        for (int a = 0; a < demos.n_actions; ++a)
            out.policy.at(x, a) = demos.count(x, a) / nx;
    }
    return out;
}

} // namespace riskrl
