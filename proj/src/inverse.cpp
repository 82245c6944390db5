#include "riskrl/inverse.hpp"
#include "riskrl/errors.hpp"
#include "riskrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDim = 4;

struct Support {
    std::vector<std::vector<std::pair<int, double>>> next;
    explicit Support(const FiniteMDP& mdp) {
        next.resize(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions);
        for (int x = 0; x < mdp.n_states; ++x)
            for (int a : mdp.admissible[x])
                for (int x2 = 0; x2 < mdp.n_states; ++x2)
                    if (double p = mdp.p(x, a, x2); p > 0.0)
                        next[static_cast<std::size_t>(x) * mdp.n_actions + a].emplace_back(x2, p);
    }
};

// greedy actions under qstar, counting ties within 1e-9
std::vector<int> greedy_actions(const FiniteMDP& mdp, const QTable& q, long* ties) {
    std::vector<int> astar(mdp.n_states);
    for (int x = 0; x < mdp.n_states; ++x) {
        int best = greedy_action(mdp, q, x);
        astar[x] = best;
        if (ties) {
            for (int a : mdp.admissible[x])
                if (a != best && std::abs(q.at(x, a) - q.at(x, best)) < 1e-9) {
                    ++(*ties);
                    break;
                }
        }
    }
    return astar;
}

// One S sweep. Returns max_k |E[...]| over non-absorbing (x, a).
double sweep_S(const FiniteMDP& mdp, const Support& sup, const ValueFnSpec& spec,
               const QTable& q, const std::vector<double>& g, const std::vector<int>& astar,
               const DQTable& phi, double alpha, DQTable& out) {
    const int d = phi.dim;
    double worst = 0.0;
    double acc[kMaxDim], d2[kMaxDim];
    for (int x = 0; x < mdp.n_states; ++x) {
        if (mdp.is_absorbing(x)) {
            for (int a : mdp.admissible[x])
                for (int k = 0; k < d; ++k) out.at(x, a, k) = 0.0;
            continue;
        }
        for (int a : mdp.admissible[x]) {
            const double base = -q.at(x, a);
            for (int k = 0; k < d; ++k) acc[k] = 0.0;
            for (auto [x2, p] : sup.next[static_cast<std::size_t>(x) * mdp.n_actions + a]) {
                const double cont = base + mdp.gamma * g[x2];
                const int as = astar[x2];
                for (const auto& e : mdp.rewards[x][a]) {
                    const double y = e.r + cont;
                    const double pw = p * e.prob;
                    const double d1 = deriv_y(spec, y);
                    deriv_theta(spec, y, std::span<double>(d2, d));
                    for (int k = 0; k < d; ++k)
                        acc[k] += pw * (d2[k] + d1 * (mdp.gamma * phi.at(x2, as, k) - phi.at(x, a, k)));
                }
            }
            for (int k = 0; k < d; ++k) {
                out.at(x, a, k) = phi.at(x, a, k) + alpha * acc[k];
                worst = std::max(worst, std::abs(acc[k]));
            }
        }
    }
    return worst;
}

double resolve_radius_dq(const FiniteMDP& mdp, const ValueFnSpec& spec, const SolverConfig& cfg) {
    if (cfg.radius) return *cfg.radius;
    try {
        return find_admissible_K(spec, mdp.reward_bound(), mdp.gamma);
    } catch (const SolverError&) {
        return kInf;
    }
}

double initial_alpha_dq(const FiniteMDP& mdp, const ValueFnSpec& spec,
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

} // namespace

DQTable apply_S(const FiniteMDP& mdp, const ValueFnSpec& spec, const QTable& qstar,
                const DQTable& phi, double alpha) {
    if (!(alpha > 0 && alpha <= 1)) throw ConfigError("apply_S: alpha must lie in (0, 1]");
    spec.validate();
    if (phi.dim != spec.free_param_count())
        throw ConfigError("apply_S: phi dimension does not match family");
    Support sup(mdp);
    std::vector<double> g(mdp.n_states);
    for (int x = 0; x < mdp.n_states; ++x) g[x] = qstar.max_admissible(mdp, x);
    auto astar = greedy_actions(mdp, qstar, nullptr);
    DQTable out(mdp.n_states, mdp.n_actions, phi.dim);
    out.spec = spec;
    sweep_S(mdp, sup, spec, qstar, g, astar, phi, alpha, out);
    return out;
}

DQTable solve_dq_fixed_point(const FiniteMDP& mdp, const ValueFnSpec& spec,
                             const QTable& qstar, const SolverConfig& cfg,
                             DQDiagnostics* diag, const DQTable* warm_start) {
    cfg.validate();
    spec.validate();
    const int d = spec.free_param_count();

    const double K = resolve_radius_dq(mdp, spec, cfg);
    double alpha = initial_alpha_dq(mdp, spec, cfg, K);

    Support sup(mdp);
    std::vector<double> g(mdp.n_states);
    for (int x = 0; x < mdp.n_states; ++x) g[x] = qstar.max_admissible(mdp, x);

    DQDiagnostics dg;
    dg.radius = K;
    auto astar = greedy_actions(mdp, qstar, &dg.tie_events);

    DQTable phi = warm_start && warm_start->dim == d &&
                          warm_start->n_states == mdp.n_states
                      ? *warm_start
                      : DQTable(mdp.n_states, mdp.n_actions, d);
    phi.spec = spec;
    for (int x = 0; x < mdp.n_states; ++x)
        if (mdp.is_absorbing(x))
            for (int a : mdp.admissible[x])
                for (int k = 0; k < d; ++k) phi.at(x, a, k) = 0.0;

    DQTable next(mdp.n_states, mdp.n_actions, d);
    next.spec = spec;
    double prev_res = kInf;
    int streak = 0;

    for (long it = 1; it <= cfg.max_iters; ++it) {
        const double res = sweep_S(mdp, sup, spec, qstar, g, astar, phi, alpha, next);
        dg.iterations = it;
        dg.final_alpha = alpha;
        dg.bellman_residual = res;
        dg.residual = alpha * res;

        if (!std::isfinite(res) || res > prev_res) {
            alpha *= cfg.shrink;
            ++dg.shrink_events;
            streak = 0;
            prev_res = kInf;
            if (alpha < cfg.alpha_min) {
                if (diag) *diag = dg;
                throw SolverError("derivative solve: step size underflow");
            }
            continue;
        }

        std::swap(phi.values, next.values);
        if (dg.residual < cfg.tol) {
            if (diag) *diag = dg;
            return phi;
        }
        prev_res = res;
        if (++streak >= cfg.grow_period) {
            alpha = std::min(1.0, alpha * cfg.grow);
            streak = 0;
            prev_res = kInf;
        }
    }
    if (diag) *diag = dg;
    throw SolverError("derivative solve exhausted max_iters without reaching tol");
}

std::vector<double> policy_derivative(const FiniteMDP& mdp, const Policy& pi,
                                      const DQTable& phi, double beta) {
    const int d = phi.dim;
    std::vector<double> out(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * d, 0.0);
    std::vector<double> avg(d);
    for (int x = 0; x < mdp.n_states; ++x) {
        std::fill(avg.begin(), avg.end(), 0.0);
        for (int a : mdp.admissible[x])
            for (int k = 0; k < d; ++k) avg[k] += pi.at(x, a) * phi.at(x, a, k);
        for (int a : mdp.admissible[x])
            for (int k = 0; k < d; ++k)
                out[(static_cast<std::size_t>(x) * mdp.n_actions + a) * d + k] =
                    pi.at(x, a) * beta * (phi.at(x, a, k) - avg[k]);
    }
    return out;
}

double loss_nll(const Policy& pi, const DemonstrationSet& demos) {
    if (demos.total == 0) throw ConfigError("loss: empty demonstration set");
    double loss = 0.0;
    for (int x = 0; x < demos.n_states; ++x)
        for (int a = 0; a < demos.n_actions; ++a) {
            double w = demos.weight(x, a);
            if (w == 0.0) continue;
            double p = pi.at(x, a);
            if (p <= 0.0) throw MathError("loss_nll: demonstrated pair has zero policy probability");
            loss -= w * std::log(p);
        }
    return loss;
}

double loss_kl(const Policy& pi, const DemonstrationSet& demos) {
    if (demos.total == 0) throw ConfigError("loss: empty demonstration set");
    double loss = 0.0;
    for (int x = 0; x < demos.n_states; ++x) {
        double nx = demos.state_count(x);
        if (nx <= 0.0) continue;
        for (int a = 0; a < demos.n_actions; ++a) {
            double ph = demos.count(x, a) / nx;
            if (ph == 0.0) continue;
            double p = pi.at(x, a);
            if (p <= 0.0) throw MathError("loss_kl: empirical mass where policy is zero");
            loss += ph * std::log(ph / p);
        }
    }
    return loss;
}

namespace {

double assemble_loss(const DemonstrationSet& demos, const Policy& pi, LossKind kind) {
    return kind == LossKind::NLL ? loss_nll(pi, demos) : loss_kl(pi, demos);
}

std::vector<double> assemble_gradient(const FiniteMDP& mdp, const DemonstrationSet& demos,
                                      const Policy& pi, const DQTable& phi, double beta,
                                      LossKind kind) {
    const int d = phi.dim;
    auto dpi = policy_derivative(mdp, pi, phi, beta);
    std::vector<double> grad(d, 0.0);
    for (int x = 0; x < demos.n_states; ++x) {
        double nx = demos.state_count(x);
        if (nx <= 0.0) continue;
        for (int a = 0; a < demos.n_actions; ++a) {
            double c = demos.count(x, a);
            if (c == 0.0) continue;
            // NLL weights pairs by w(x,a); KL weights states equally with
            // conditional weights pihat(a|x)
            double w = kind == LossKind::NLL ? c / demos.total : c / nx;
            double p = pi.at(x, a);
            for (int k = 0; k < d; ++k)
                grad[k] -= w * dpi[(static_cast<std::size_t>(x) * mdp.n_actions + a) * d + k] / p;
        }
    }
    return grad;
}

} // namespace

std::vector<double> loss_gradient(const FiniteMDP& mdp, const ValueFnSpec& spec,
                                  const DemonstrationSet& demos, double beta,
                                  LossKind kind, const SolverConfig& solver) {
    QTable q = solve_q_fixed_point(mdp, spec, solver);
    DQTable phi = solve_dq_fixed_point(mdp, spec, q, solver);
    Policy pi = boltzmann_policy(mdp, q, beta);
    return assemble_gradient(mdp, demos, pi, phi, beta, kind);
}

void IRLConfig::validate() const {
    if (restarts < 1) throw ConfigError("irl: restarts must be >= 1");
    if (!(beta > 0)) throw ConfigError("irl: beta must be positive");
    if (!(armijo_c1 > 0 && armijo_c1 < 1)) throw ConfigError("irl: armijo_c1 must lie in (0, 1)");
    if (!(backtrack_shrink > 0 && backtrack_shrink < 1))
        throw ConfigError("irl: backtrack_shrink must lie in (0, 1)");
    if (!(loss_tol > 0)) throw ConfigError("irl: loss_tol must be positive");
    for (const auto& b : param_box)
        if (!(b[0] < b[1])) throw ConfigError("irl: parameter box must have lo < hi");
    solver.validate();
}

std::vector<std::array<double, 2>> default_param_box(ValueFamily family) {
    switch (family) {
        case ValueFamily::Prospect:
        case ValueFamily::LProspect:
            return {{{1e-3, 10.0}}, {{1e-3, 10.0}}, {{0.3, 2.0}}, {{0.3, 2.0}}};
        case ValueFamily::Entropic:
            return {{{-1.0, 1.0}}};
        case ValueFamily::Linear:
            return {{{-0.95, 0.95}}};
    }
    return {};
}

namespace {

// evaluation state carried across outer iterations of one restart
struct FitState {
    QTable q;
    DQTable phi;
    bool warm = false;
};

ValueFnSpec spec_at(ValueFamily family, const std::vector<double>& theta) {
    ValueFnSpec s;
    s.family = family;
    s.set_params(theta);
    return s;
}

void project_theta(std::vector<double>& theta, const std::vector<std::array<double, 2>>& box,
                   ValueFamily family) {
    for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = std::clamp(theta[i], box[i][0], box[i][1]);
    // the entropic coefficient may not cross exactly zero
    if (family == ValueFamily::Entropic && theta[0] == 0.0) theta[0] = 1e-12;
}

// loss at theta; returns +inf when the inner solver fails
double eval_loss(const FiniteMDP& mdp, const DemonstrationSet& demos, ValueFamily family,
                 const std::vector<double>& theta, const IRLConfig& cfg, FitState& st,
                 Policy* pi_out) {
    ValueFnSpec spec = spec_at(family, theta);
    try {
        st.q = solve_q_fixed_point(mdp, spec, cfg.solver, nullptr, st.warm ? &st.q : nullptr);
    } catch (const SolverError&) {
        return kInf;
    }
    st.warm = true;
    Policy pi = boltzmann_policy(mdp, st.q, cfg.beta);
    double l = assemble_loss(demos, pi, cfg.loss);
    if (pi_out) *pi_out = std::move(pi);
    return l;
}

std::vector<double> eval_gradient(const FiniteMDP& mdp, const DemonstrationSet& demos,
                                  ValueFamily family, const std::vector<double>& theta,
                                  const IRLConfig& cfg, FitState& st) {
    ValueFnSpec spec = spec_at(family, theta);
    st.phi = solve_dq_fixed_point(mdp, spec, st.q, cfg.solver, nullptr,
                                  st.phi.dim > 0 ? &st.phi : nullptr);
    Policy pi = boltzmann_policy(mdp, st.q, cfg.beta);
    return assemble_gradient(mdp, demos, pi, st.phi, cfg.beta, cfg.loss);
}

} // namespace

IRLResult irl_fit(const FiniteMDP& mdp, const DemonstrationSet& demos,
                  ValueFamily family, const IRLConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (demos.total == 0) throw ConfigError("irl_fit: empty demonstration set");

    auto box = cfg.param_box.empty() ? default_param_box(family) : cfg.param_box;
    ValueFnSpec probe;
    probe.family = family;
    const int d = probe.free_param_count();
    if (static_cast<int>(box.size()) != d)
        throw ConfigError("irl_fit: parameter box size does not match family");

    IRLResult result;
    result.best_loss = kInf;
    Policy best_policy;

    for (int r = 0; r < cfg.restarts; ++r) {
        Rng rng(seed + static_cast<std::uint64_t>(r));
        RestartResult rr;
        rr.theta_init.resize(d);
        for (int k = 0; k < d; ++k) rr.theta_init[k] = rng.uniform(box[k][0], box[k][1]);
        if (family == ValueFamily::Entropic && rr.theta_init[0] == 0.0) rr.theta_init[0] = 1e-12;

        FitState st;
        std::vector<double> theta = rr.theta_init;
        Policy pi;
        double loss = eval_loss(mdp, demos, family, theta, cfg, st, &pi);
        if (!std::isfinite(loss)) {
            rr.failed = true;
            rr.theta_final = theta;
            result.restarts.push_back(std::move(rr));
            continue;
        }
        rr.loss_trace.push_back(loss);

        for (int it = 0; it < cfg.max_outer_iters; ++it) {
            std::vector<double> grad;
            try {
                grad = eval_gradient(mdp, demos, family, theta, cfg, st);
            } catch (const SolverError&) {
                break;  // keep the best point reached so far
            }

            // Armijo backtracking on projected candidates
            double eta = 1.0;
            double new_loss = kInf;
            std::vector<double> cand(d);
            bool accepted = false;
            while (eta > 1e-14) {
                double decrease = 0.0;
                for (int k = 0; k < d; ++k) cand[k] = theta[k] - eta * grad[k];
                project_theta(cand, box, family);
                for (int k = 0; k < d; ++k) decrease += grad[k] * (theta[k] - cand[k]);
                if (decrease <= 0.0) break;  // projected gradient vanished
                new_loss = eval_loss(mdp, demos, family, cand, cfg, st, nullptr);
                if (new_loss <= loss - cfg.armijo_c1 * decrease) {
                    accepted = true;
                    break;
                }
                eta *= cfg.backtrack_shrink;
            }
            if (!accepted) {
                rr.converged = true;  // no descent direction left within the box
                break;
            }
            theta = cand;
            double change = loss - new_loss;
            loss = new_loss;
            rr.loss_trace.push_back(loss);
            if (std::abs(change) < cfg.loss_tol) {
                rr.converged = true;
                break;
            }
        }

        // re-evaluate so the stored policy matches the final theta
        loss = eval_loss(mdp, demos, family, theta, cfg, st, &pi);
        rr.theta_final = theta;
        if (std::isfinite(loss) && loss < result.best_loss) {
            result.best_loss = loss;
            result.best_restart = static_cast<int>(result.restarts.size());
            result.best_theta = theta;
            result.best_spec = spec_at(family, theta);
            best_policy = std::move(pi);
        }
        result.restarts.push_back(std::move(rr));
    }

    if (result.best_restart < 0) throw SolverError("irl_fit: all restarts failed");
    result.best_policy = std::move(best_policy);
    return result;
}

} // namespace riskrl
