#include "riskrl/io.hpp"
#include "riskrl/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace riskrl {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(std::string("malformed json in ") + what);
    return j;
}

} // namespace

std::string spec_to_json(const ValueFnSpec& spec) {
    json j{{"family", family_name(spec.family)},
           {"k_minus", spec.k_minus},
           {"k_plus", spec.k_plus},
           {"zeta_minus", spec.zeta_minus},
           {"zeta_plus", spec.zeta_plus},
           {"lambda", spec.lambda},
           {"kappa", spec.kappa},
           {"epsilon", spec.epsilon},
           {"y0", spec.y0},
           {"v0", spec.v0}};
    return j.dump(2) + "\n";
}

ValueFnSpec spec_from_json(const std::string& text) {
    json j = parse(text, "value-function spec");
    ValueFnSpec spec;
    try {
        spec.family = family_from_name(j.at("family").get<std::string>());
        spec.k_minus = j.value("k_minus", spec.k_minus);
        spec.k_plus = j.value("k_plus", spec.k_plus);
        spec.zeta_minus = j.value("zeta_minus", spec.zeta_minus);
        spec.zeta_plus = j.value("zeta_plus", spec.zeta_plus);
        spec.lambda = j.value("lambda", spec.lambda);
        spec.kappa = j.value("kappa", spec.kappa);
        spec.epsilon = j.value("epsilon", spec.epsilon);
        spec.y0 = j.value("y0", spec.y0);
        spec.v0 = j.value("v0", spec.v0);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("value-function spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string mdp_to_json(const FiniteMDP& mdp) {
    json rewards = json::array();
    for (int x = 0; x < mdp.n_states; ++x)
        for (int a : mdp.admissible[x]) {
            json entries = json::array();
            for (const auto& e : mdp.rewards[x][a])
                entries.push_back(json{{"prob", e.prob}, {"r", e.r}});
            rewards.push_back(json{{"x", x}, {"a", a}, {"entries", entries}});
        }
    json absorbing = json::array();
    for (int x = 0; x < mdp.n_states; ++x)
        if (mdp.is_absorbing(x)) absorbing.push_back(x);
    json j{{"states", mdp.n_states},
           {"actions", mdp.n_actions},
           {"admissible", mdp.admissible},
           {"transition", mdp.transition},
           {"rewards", rewards},
           {"gamma", mdp.gamma},
           {"absorbing", absorbing},
           {"state_labels", mdp.state_labels},
           {"action_labels", mdp.action_labels}};
    return j.dump() + "\n";
}

FiniteMDP mdp_from_json(const std::string& text) {
    json j = parse(text, "mdp");
    FiniteMDP mdp;
    try {
        mdp.allocate(j.at("states").get<int>(), j.at("actions").get<int>());
        mdp.admissible = j.at("admissible").get<std::vector<std::vector<int>>>();
        mdp.transition = j.at("transition").get<std::vector<double>>();
        mdp.gamma = j.at("gamma").get<double>();
        for (const auto& rec : j.at("rewards")) {
            int x = rec.at("x").get<int>();
            int a = rec.at("a").get<int>();
            for (const auto& e : rec.at("entries"))
                mdp.rewards[x][a].push_back(
                    RewardEntry{e.at("prob").get<double>(), e.at("r").get<double>()});
        }
        for (int x : j.at("absorbing").get<std::vector<int>>()) mdp.absorbing[x] = 1;
        mdp.state_labels = j.value("state_labels", std::vector<std::string>{});
        mdp.action_labels = j.value("action_labels", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mdp file: ") + e.what());
    }
    validate(mdp);
    return mdp;
}

std::string qtable_to_json(const QTable& q) {
    json values = json::array();
    for (int x = 0; x < q.n_states; ++x)
        for (int a = 0; a < q.n_actions; ++a)
            values.push_back(json::array({x, a, q.at(x, a)}));
    json j{{"states", q.n_states},
           {"actions", q.n_actions},
           {"values", values},
           {"spec", json::parse(spec_to_json(q.spec))}};
    return j.dump() + "\n";
}

QTable qtable_from_json(const std::string& text) {
    json j = parse(text, "q table");
    try {
        QTable q(j.at("states").get<int>(), j.at("actions").get<int>());
        for (const auto& row : j.at("values"))
            q.at(row.at(0).get<int>(), row.at(1).get<int>()) = row.at(2).get<double>();
        q.spec = spec_from_json(j.at("spec").dump());
        return q;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("q table file: ") + e.what());
    }
}

std::string policy_to_json(const Policy& pi) {
    json j{{"states", pi.n_states}, {"actions", pi.n_actions}, {"probs", pi.probs}};
    return j.dump() + "\n";
}

Policy policy_from_json(const std::string& text) {
    json j = parse(text, "policy");
    try {
        Policy pi(j.at("states").get<int>(), j.at("actions").get<int>());
        pi.probs = j.at("probs").get<std::vector<double>>();
        return pi;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("policy file: ") + e.what());
    }
}

void demos_to_jsonl(const DemonstrationSet& demos, std::ostream& out) {
    for (std::size_t e = 0; e < demos.episodes.size(); ++e) {
        int t = 0;
        for (auto [x, a] : demos.episodes[e]) {
            out << "{\"episode\": " << e << ", \"t\": " << t++ << ", \"x\": " << x
                << ", \"a\": " << a << "}\n";
        }
    }
}

DemonstrationSet demos_from_jsonl(std::istream& in, int n_states, int n_actions) {
    DemonstrationSet demos;
    std::string line;
    long last_episode = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = parse(line, "demonstrations");
        long e = j.at("episode").get<long>();
        if (e != last_episode) {
            if (e != last_episode + 1)
                throw ConfigError("demonstrations: episodes must be contiguous");
            demos.episodes.emplace_back();
            last_episode = e;
        }
        demos.episodes.back().emplace_back(j.at("x").get<int>(), j.at("a").get<int>());
    }
    demos.rebuild_counts(n_states, n_actions);
    return demos;
}

std::string rideshare_config_to_json(const RideshareConfig& cfg) {
    json j{{"price_levels", cfg.price_levels},
           {"horizon", cfg.horizon},
           {"wait_reward", cfg.wait_reward},
           {"satisfaction0", cfg.satisfaction0},
           {"satisfaction_step", cfg.satisfaction_step},
           {"p_base", cfg.p_base},
           {"p_mile", cfg.p_mile},
           {"p_min", cfg.p_min},
           {"distance_miles", cfg.distance_miles},
           {"travel_loc", cfg.travel_loc},
           {"travel_scale", cfg.travel_scale},
           {"travel_lower", cfg.travel_lower},
           {"travel_upper", cfg.travel_upper},
           {"time_bins", cfg.time_bins},
           {"gamma", cfg.gamma}};
    return j.dump(2) + "\n";
}

RideshareConfig rideshare_config_from_json(const std::string& text) {
    json j = parse(text, "rideshare config");
    RideshareConfig cfg;
    try {
        cfg.price_levels = j.value("price_levels", cfg.price_levels);
        cfg.horizon = j.value("horizon", cfg.horizon);
        cfg.wait_reward = j.value("wait_reward", cfg.wait_reward);
        cfg.satisfaction0 = j.value("satisfaction0", cfg.satisfaction0);
        cfg.satisfaction_step = j.value("satisfaction_step", cfg.satisfaction_step);
        cfg.p_base = j.value("p_base", cfg.p_base);
        cfg.p_mile = j.value("p_mile", cfg.p_mile);
        cfg.p_min = j.value("p_min", cfg.p_min);
        cfg.distance_miles = j.value("distance_miles", cfg.distance_miles);
        cfg.travel_loc = j.value("travel_loc", cfg.travel_loc);
        cfg.travel_scale = j.value("travel_scale", cfg.travel_scale);
        cfg.travel_lower = j.value("travel_lower", cfg.travel_lower);
        cfg.travel_upper = j.value("travel_upper", cfg.travel_upper);
        cfg.time_bins = j.value("time_bins", cfg.time_bins);
        cfg.gamma = j.value("gamma", cfg.gamma);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("rideshare config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string price_matrix_to_json(const std::array<std::array<double, 4>, 4>& m) {
    json rows = json::array();
    for (const auto& r : m) rows.push_back(std::vector<double>(r.begin(), r.end()));
    return json{{"price_transition", rows}}.dump(2) + "\n";
}

std::array<std::array<double, 4>, 4> price_matrix_from_json(const std::string& text) {
    json j = parse(text, "price matrix");
    std::array<std::array<double, 4>, 4> m{};
    try {
        const auto& rows = j.at("price_transition");
        if (rows.size() != 4) throw ConfigError("price matrix: need 4 rows");
        for (int i = 0; i < 4; ++i) {
            if (rows[i].size() != 4) throw ConfigError("price matrix: need 4 columns");
            for (int jj = 0; jj < 4; ++jj) m[i][jj] = rows[i][jj].get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("price matrix: ") + e.what());
    }
    return m;
}

std::string irl_result_to_json(const IRLResult& result) {
    json restarts = json::array();
    for (const auto& r : result.restarts)
        restarts.push_back(json{{"theta_init", r.theta_init},
                                {"theta_final", r.theta_final},
                                {"loss_trace", r.loss_trace},
                                {"converged", r.converged},
                                {"failed", r.failed}});
    json j{{"restarts", restarts},
           {"best_restart", result.best_restart},
           {"best_theta", result.best_theta},
           {"best_loss", result.best_loss},
           {"best_spec", json::parse(spec_to_json(result.best_spec))}};
    return j.dump(2) + "\n";
}

std::string tv_report_to_csv(const TVReport& rep) {
    std::ostringstream out;
    out << "state,tv\n";
    out.precision(17);
    for (std::size_t i = 0; i < rep.states.size(); ++i)
        out << rep.states[i] << "," << rep.per_state[i] << "\n";
    return out.str();
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "size,mean_tv,ci_lo,ci_hi\n";
    out.precision(17);
    for (const auto& p : sweep.points)
        out << p.size << "," << p.mean_tv << "," << p.ci_lo << "," << p.ci_hi << "\n";
    return out.str();
}

std::string sweep_summary_to_json(const SweepResult& sweep) {
    json points = json::array();
    for (const auto& p : sweep.points)
        points.push_back(json{{"size", p.size}, {"mean_tv", p.mean_tv},
                              {"ci_lo", p.ci_lo}, {"ci_hi", p.ci_hi}});
    return json{{"points", points}, {"fit_a", sweep.fit_a}, {"fit_b", sweep.fit_b}}.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << contents;
}

std::string file_checksum(const std::string& path) {
    std::string data = read_file(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace riskrl
