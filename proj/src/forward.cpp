#include "riskrl/forward.hpp"
#include "riskrl/errors.hpp"
#include "riskrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// compact per-(x,a) transition support, built once per solve
struct Support {
    std::vector<std::vector<std::pair<int, double>>> next;  // [x*A+a] -> (x', p)
    explicit Support(const FiniteMDP& mdp) {
        next.resize(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions);
        for (int x = 0; x < mdp.n_states; ++x)
            for (int a : mdp.admissible[x])
                for (int x2 = 0; x2 < mdp.n_states; ++x2)
                    if (double p = mdp.p(x, a, x2); p > 0.0)
                        next[static_cast<std::size_t>(x) * mdp.n_actions + a].emplace_back(x2, p);
    }
};

// One T sweep: out = Q + alpha * E[vtilde(TD)], absorbing rows pinned to 0.
// Returns max |E[vtilde(TD)]| over non-absorbing (x, a).
double sweep_T(const FiniteMDP& mdp, const Support& sup, const ValueFnSpec& spec,
               const QTable& q, double alpha, QTable& out, std::vector<double>& g) {
    g.resize(mdp.n_states);
    for (int x = 0; x < mdp.n_states; ++x) g[x] = q.max_admissible(mdp, x);

    double worst = 0.0;
    for (int x = 0; x < mdp.n_states; ++x) {
        if (mdp.is_absorbing(x)) {
            for (int a : mdp.admissible[x]) out.at(x, a) = 0.0;
            continue;
        }
        for (int a : mdp.admissible[x]) {
            const double base = -q.at(x, a);
            double acc = 0.0;
            for (auto [x2, p] : sup.next[static_cast<std::size_t>(x) * mdp.n_actions + a]) {
                const double cont = base + mdp.gamma * g[x2];
                for (const auto& e : mdp.rewards[x][a])
                    acc += p * e.prob * eval_tilde(spec, e.r + cont);
            }
            out.at(x, a) = q.at(x, a) + alpha * acc;
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

double resolve_radius(const FiniteMDP& mdp, const ValueFnSpec& spec, const SolverConfig& cfg) {
    if (cfg.radius) {
        if (!(*cfg.radius > 0)) throw ConfigError("solver radius must be positive");
        return *cfg.radius;
    }
    try {
        return find_admissible_K(spec, mdp.reward_bound(), mdp.gamma);
    } catch (const SolverError&) {
        return kInf;  // no guaranteed ball; run unconstrained with adaptive alpha
    }
}

double initial_alpha(const FiniteMDP& mdp, const ValueFnSpec& spec,
                     const SolverConfig& cfg, double K) {
    if (cfg.alpha0 > 0) return cfg.alpha0;
    if (std::isfinite(K)) {
        const double M = mdp.reward_bound();
        try {
            auto lb = lipschitz_bounds(spec, -M - K, M + K);
            return std::min(1.0, 1.0 / lb.L_K);
        } catch (const MathError&) {
        }
    }
    return 0.5;
}

void clip_table(QTable& q, double K, long& clip_events) {
    for (double& v : q.values) {
        if (v > K) { v = K; ++clip_events; }
        else if (v < -K) { v = -K; ++clip_events; }
    }
}

} // namespace

void SolverConfig::validate() const {
    if (alpha0 < 0 || alpha0 > 1) throw ConfigError("solver: alpha0 must lie in [0, 1]");
    if (!(shrink > 0 && shrink < 1)) throw ConfigError("solver: shrink must lie in (0, 1)");
    if (!(grow > 1)) throw ConfigError("solver: grow must exceed 1");
    if (!(tol > 0)) throw ConfigError("solver: tol must be positive");
    if (grow_period < 1) throw ConfigError("solver: grow_period must be >= 1");
}

QTable apply_T(const FiniteMDP& mdp, const ValueFnSpec& spec, const QTable& q, double alpha) {
    if (!(alpha > 0 && alpha <= 1)) throw ConfigError("apply_T: alpha must lie in (0, 1]");
    spec.validate();
    Support sup(mdp);
    QTable out(mdp.n_states, mdp.n_actions);
    out.spec = spec;
    std::vector<double> g;
    sweep_T(mdp, sup, spec, q, alpha, out, g);
    return out;
}

QTable solve_q_fixed_point(const FiniteMDP& mdp, const ValueFnSpec& spec,
                           const SolverConfig& cfg, SolveDiagnostics* diag,
                           const QTable* warm_start) {
    cfg.validate();
    spec.validate();

    const double K = resolve_radius(mdp, spec, cfg);
    double alpha = initial_alpha(mdp, spec, cfg, K);

    QTable q = warm_start && warm_start->n_states == mdp.n_states &&
                       warm_start->n_actions == mdp.n_actions
                   ? *warm_start
                   : QTable(mdp.n_states, mdp.n_actions);
    q.spec = spec;
    for (int x = 0; x < mdp.n_states; ++x)
        if (mdp.is_absorbing(x))
            for (int a : mdp.admissible[x]) q.at(x, a) = 0.0;

    Support sup(mdp);
    QTable next(mdp.n_states, mdp.n_actions);
    next.spec = spec;
    std::vector<double> g;

    SolveDiagnostics d;
    d.radius = K;
    double prev_bellman = kInf;
    int streak = 0;

    for (long it = 1; it <= cfg.max_iters; ++it) {
        const double bellman = sweep_T(mdp, sup, spec, q, alpha, next, g);
        d.iterations = it;
        d.final_alpha = alpha;
        d.bellman_residual = bellman;
        d.residual = alpha * bellman;

        if (!std::isfinite(bellman) || bellman > prev_bellman) {
            // diverging: shrink the step and retry from the current iterate
            alpha *= cfg.shrink;
            ++d.shrink_events;
            streak = 0;
            prev_bellman = kInf;
            if (alpha < cfg.alpha_min) {
                if (diag) *diag = d;
                throw SolverError("step size underflow: fixed-point ball condition appears violated");
            }
            continue;
        }

        std::swap(q.values, next.values);
        if (cfg.clip_to_ball && std::isfinite(K)) clip_table(q, K, d.clip_events);

        if (d.residual < cfg.tol) {
            if (diag) *diag = d;
            return q;
        }
        prev_bellman = bellman;
        if (++streak >= cfg.grow_period) {
            alpha = std::min(1.0, alpha * cfg.grow);
            streak = 0;
            prev_bellman = kInf;
        }
    }
    if (diag) *diag = d;
    throw SolverError("fixed-point iteration exhausted max_iters without reaching tol");
}

void LearningRateSchedule::validate() const {
    if (!(c > 0)) throw ConfigError("learning rate: c must be positive");
    if (!(omega > 0.5 && omega <= 1.0)) throw ConfigError("learning rate: omega must lie in (0.5, 1]");
}

QTable q_learning(const FiniteMDP& mdp, const ValueFnSpec& spec,
                  const LearningRateSchedule& schedule, long n_steps,
                  std::uint64_t seed, const QLearningOptions& opts) {
    schedule.validate();
    spec.validate();
    if (opts.behavior) validate_policy(mdp, *opts.behavior);

    Rng rng(seed);
    QTable q(mdp.n_states, mdp.n_actions);
    q.spec = spec;
    std::vector<long> visits(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0);

    std::vector<int> live;
    for (int x = 0; x < mdp.n_states; ++x)
        if (!mdp.is_absorbing(x)) live.push_back(x);
    if (live.empty()) throw ConfigError("q_learning: all states absorbing");

    auto restart = [&]() {
        if (opts.start_state >= 0) return opts.start_state;
        return live[rng.below(static_cast<int>(live.size()))];
    };

    int x = restart();
    int episode_steps = 0;
    for (long t = 0; t < n_steps; ++t) {
        if (mdp.is_absorbing(x) ||
            (opts.restart_period > 0 && episode_steps >= opts.restart_period)) {
            x = restart();
            episode_steps = 0;
        }
        ++episode_steps;

        const auto& adm = mdp.admissible[x];
        int a;
        if (opts.behavior) {
            int idx = rng.sample_index(static_cast<int>(adm.size()),
                                       [&](int i) { return opts.behavior->at(x, adm[i]); });
            a = adm[idx];
        } else if (rng.uniform() < opts.epsilon) {
            a = adm[rng.below(static_cast<int>(adm.size()))];
        } else {
            a = greedy_action(mdp, q, x);
        }

        const auto& dist = mdp.rewards[x][a];
        int w = rng.sample_index(static_cast<int>(dist.size()),
                                 [&](int i) { return dist[i].prob; });
        int x2 = rng.sample_index(mdp.n_states, [&](int s) { return mdp.p(x, a, s); });

        long& n = visits[static_cast<std::size_t>(x) * mdp.n_actions + a];
        ++n;
        const double alpha_t = schedule.c / std::pow(static_cast<double>(n), schedule.omega);
        const double td = dist[w].r + mdp.gamma * q.max_admissible(mdp, x2) - q.at(x, a);
        double v = q.at(x, a) + alpha_t * eval_tilde(spec, td);
        if (opts.radius) v = std::clamp(v, -*opts.radius, *opts.radius);
        q.at(x, a) = v;
        x = x2;
    }
    return q;
}

int greedy_action(const FiniteMDP& mdp, const QTable& q, int x) {
    int best = mdp.admissible[x].front();
    double bestv = q.at(x, best);
    for (int a : mdp.admissible[x])
        if (q.at(x, a) > bestv) {
            bestv = q.at(x, a);
            best = a;
        }
    return best;
}

Policy boltzmann_policy(const FiniteMDP& mdp, const QTable& q, double beta) {
    if (!(beta > 0)) throw ConfigError("boltzmann_policy: beta must be positive");
    Policy pi(mdp.n_states, mdp.n_actions);
    for (int x = 0; x < mdp.n_states; ++x) {
        const auto& adm = mdp.admissible[x];
        double shift = -kInf;
        for (int a : adm) shift = std::max(shift, beta * q.at(x, a));
        double z = 0.0;
        for (int a : adm) z += std::exp(beta * q.at(x, a) - shift);
        for (int a : adm) pi.at(x, a) = std::exp(beta * q.at(x, a) - shift) / z;
    }
    return pi;
}

Policy greedy_policy(const FiniteMDP& mdp, const QTable& q) {
    Policy pi(mdp.n_states, mdp.n_actions);
    for (int x = 0; x < mdp.n_states; ++x) pi.at(x, greedy_action(mdp, q, x)) = 1.0;
    return pi;
}

} // namespace riskrl
