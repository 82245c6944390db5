#include "riskrl/evaluation.hpp"
#include "riskrl/errors.hpp"
#include "riskrl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace riskrl {

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ConfigError("tv_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ConfigError("kl_divergence: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0) throw MathError("kl_divergence: q vanishes where p does not");
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

double pinsker_bound(double kl) {
    if (kl < 0) throw ConfigError("pinsker_bound: kl must be nonnegative");
    return std::sqrt(2.0 * kl);
}

double dkw_bound(long n, int action_count, double nu) {
    if (n < 1 || !(nu > 0 && nu < 1)) throw ConfigError("dkw_bound: need n >= 1, nu in (0, 1)");
    return action_count * std::sqrt((2.0 / n) * std::log(2.0 * action_count / nu));
}

double dkw_bound_tight(long n, int action_count, double nu) {
    if (n < 1 || !(nu > 0 && nu < 1)) throw ConfigError("dkw_bound: need n >= 1, nu in (0, 1)");
    return action_count * std::sqrt(std::log(2.0 * action_count / nu) / (2.0 * n));
}

TVReport policy_tv_report(const FiniteMDP& mdp, const Policy& pi_true,
                          const Policy& pi_learned) {
    if (pi_true.n_states != mdp.n_states || pi_learned.n_states != mdp.n_states ||
        pi_true.n_actions != mdp.n_actions || pi_learned.n_actions != mdp.n_actions)
        throw ConfigError("policy_tv_report: policy support does not match MDP");
    TVReport rep;
    for (int x = 0; x < mdp.n_states; ++x) {
        double s = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) s += std::abs(pi_true.at(x, a) - pi_learned.at(x, a));
        rep.states.push_back(x);
        rep.per_state.push_back(0.5 * s);
    }
    double mean = 0.0;
    for (double v : rep.per_state) mean += v;
    mean /= rep.per_state.size();
    double var = 0.0;
    for (double v : rep.per_state) var += (v - mean) * (v - mean);
    var /= rep.per_state.size();
    rep.mean = mean;
    rep.variance = var;
    return rep;
}

std::vector<int> max_likelihood_path(const FiniteMDP& mdp, const Policy& pi, int start,
                                     int max_len) {
    if (start < 0 || start >= mdp.n_states) throw ConfigError("max_likelihood_path: bad start");
    std::vector<int> path{start};
    int x = start;
    while (!mdp.is_absorbing(x) && static_cast<int>(path.size()) < max_len) {
        int best_a = mdp.admissible[x].front();
        for (int a : mdp.admissible[x])
            if (pi.at(x, a) > pi.at(x, best_a)) best_a = a;
        int best_x2 = 0;
        for (int x2 = 1; x2 < mdp.n_states; ++x2)
            if (mdp.p(x, best_a, x2) > mdp.p(x, best_a, best_x2)) best_x2 = x2;
        if (best_x2 == x) break;  // settled into a self-loop
        path.push_back(best_x2);
        x = best_x2;
    }
    return path;
}

std::pair<double, double> fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("fit_power_law: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw ConfigError("fit_power_law: points must be positive");
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double loga = (sy - b * sx) / n;
    return {std::exp(loga), b};
}

SweepResult sample_complexity_experiment(const FiniteMDP& mdp, const ValueFnSpec& true_spec,
                                         const std::vector<long>& sizes,
                                         const SweepConfig& cfg, std::uint64_t seed) {
    for (long s : sizes)
        if (s <= 0) throw ConfigError("sample_complexity_experiment: sizes must be positive");

    QTable q_true = solve_q_fixed_point(mdp, true_spec, cfg.irl.solver);
    Policy pi_true = boltzmann_policy(mdp, q_true, cfg.irl.beta);

    std::vector<double> start_dist;
    if (cfg.start_state >= 0) {
        start_dist.assign(mdp.n_states, 0.0);
        start_dist[cfg.start_state] = 1.0;
    } else {
        start_dist = uniform_start_dist(mdp);
    }

    struct Cell {
        std::size_t size_idx;
        int dataset;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        for (int dset = 0; dset < cfg.datasets_per_size; ++dset) cells.push_back({i, dset});

    const ValueFamily fit_family = cfg.fit_family.value_or(true_spec.family);
    std::vector<double> cell_tv(cells.size(), 0.0);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t c = cursor.fetch_add(1);
            if (c >= cells.size()) return;
            const auto [si, dset] = cells[c];
            std::uint64_t cell_seed = derive_seed(seed, si * 1000 + dset);
            auto demos = sample_demonstrations(mdp, pi_true, static_cast<int>(sizes[si]),
                                               start_dist, cfg.max_episode_steps, cell_seed);
            auto fit = irl_fit(mdp, demos, fit_family, cfg.irl, derive_seed(cell_seed, 7));
            cell_tv[c] = policy_tv_report(mdp, pi_true, fit.best_policy).mean;
        }
    };
    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    SweepResult result;
    std::vector<double> fit_x, fit_y;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        double mean = 0.0;
        int n = cfg.datasets_per_size;
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (cells[c].size_idx == si) mean += cell_tv[c];
        mean /= n;
        double var = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (cells[c].size_idx == si) var += (cell_tv[c] - mean) * (cell_tv[c] - mean);
        var = n > 1 ? var / (n - 1) : 0.0;
        double half = 1.96 * std::sqrt(var / n);
        result.points.push_back(SweepPoint{sizes[si], mean, mean - half, mean + half});
        if (mean > 0) {
            fit_x.push_back(static_cast<double>(sizes[si]));
            fit_y.push_back(mean);
        }
    }
    if (fit_x.size() >= 2) {
        auto [a, b] = fit_power_law(fit_x, fit_y);
        result.fit_a = a;
        result.fit_b = b;
    }
    return result;
}

} // namespace riskrl
