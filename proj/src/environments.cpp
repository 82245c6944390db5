#include "riskrl/environments.hpp"
#include "riskrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace riskrl {

const std::array<const char*, kGridActions> kGridActionNames = {
    "N", "NE", "E", "SE", "S", "SW", "W", "NW"};

namespace {

// row/col offsets matching kGridActionNames; row 0 is the top of the map
constexpr int kDr[kGridActions] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDc[kGridActions] = {0, 1, 1, 1, 0, -1, -1, -1};

double cell_reward(char c) {
    switch (c) {
        case 'G': return 1.0;
        case 'B': return -1.0;
        case 'g': return -0.1;
        case 'S':
        case '.': return 0.1;
        default: throw ConfigError(std::string("unknown map cell '") + c + "'");
    }
}

bool cell_absorbing(char c) { return c == 'G' || c == 'B'; }

} // namespace

void GridSpec::validate() const {
    if (map.empty()) throw ConfigError("malformed map: empty");
    const std::size_t width = map[0].size();
    if (width == 0) throw ConfigError("malformed map: empty row");
    int starts = 0;
    for (const auto& row : map) {
        if (row.size() != width) throw ConfigError("malformed map: ragged rows");
        for (char c : row) {
            cell_reward(c);  // throws on unknown legend characters
            if (c == 'S') ++starts;
        }
    }
    if (starts != 1) throw ConfigError("malformed map: expected exactly one S cell, found " +
                                       std::to_string(starts));
    if (std::abs(intended_prob + 7.0 * slip - 1.0) > 1e-12)
        throw ConfigError("grid spec: intended_prob + 7*slip must equal 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("grid spec: gamma must lie in [0, 1)");
}

int GridSpec::start_state() const {
    for (int r = 0; r < rows(); ++r)
        for (int c = 0; c < cols(); ++c)
            if (map[r][c] == 'S') return r * cols() + c;
    throw ConfigError("map has no start cell");
}

GridSpec load_grid_map(std::istream& in) {
    GridSpec spec;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        spec.map.push_back(line);
    }
    return spec;
}

GridSpec load_grid_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open map file: " + path);
    return load_grid_map(in);
}

FiniteMDP build_gridworld(const GridSpec& spec) {
    spec.validate();
    const int R = spec.rows(), C = spec.cols();
    const int S = R * C;

    FiniteMDP mdp;
    mdp.allocate(S, kGridActions);
    mdp.gamma = spec.gamma;
    mdp.action_labels.assign(kGridActionNames.begin(), kGridActionNames.end());
    mdp.state_labels.resize(S);

    // Entry mode: rewards attach to the destination cell, absorbing cells
    // pay once on entry and 0 afterwards. Recurring mode: the literal
    // "reward for being in the state" reading, with deterministic
    // source-cell rewards and G/B cells looping forever without episode
    // termination.
    const bool recurring =
        spec.absorbing_reward_mode == GridSpec::AbsorbingRewardMode::Recurring;

    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            const int x = r * C + c;
            const char cell = spec.map[r][c];
            mdp.state_labels[x] = "(" + std::to_string(r) + "," + std::to_string(c) + ")";
            for (int a = 0; a < kGridActions; ++a) mdp.admissible[x].push_back(a);

            if (cell_absorbing(cell)) {
                if (!recurring) mdp.absorbing[x] = 1;
                const double self_r = recurring ? cell_reward(cell) : 0.0;
                for (int a = 0; a < kGridActions; ++a) {
                    mdp.p(x, a, x) = 1.0;
                    mdp.rewards[x][a] = {RewardEntry{1.0, self_r}};
                }
                continue;
            }

            for (int a = 0; a < kGridActions; ++a) {
                // raw direction weights, then drop out-of-grid moves and
                // re-weight the rest proportionally
                double mass = 0.0;
                std::array<double, kGridActions> w{};
                for (int d = 0; d < kGridActions; ++d) {
                    int nr = r + kDr[d], nc = c + kDc[d];
                    if (nr < 0 || nr >= R || nc < 0 || nc >= C) continue;
                    w[d] = (d == a) ? spec.intended_prob : spec.slip;
                    mass += w[d];
                }
                auto& dist = mdp.rewards[x][a];
                if (recurring) dist.push_back(RewardEntry{1.0, cell_reward(cell)});
                for (int d = 0; d < kGridActions; ++d) {
                    if (w[d] == 0.0) continue;
                    int nr = r + kDr[d], nc = c + kDc[d];
                    int nx = nr * C + nc;
                    double p = w[d] / mass;
                    mdp.p(x, a, nx) += p;
                    if (!recurring)
                        dist.push_back(RewardEntry{p, cell_reward(spec.map[nr][nc])});
                }
            }
        }
    }
    validate(mdp);
    return mdp;
}

int price_bin(double multiplier) {
    if (multiplier < 1.2) return 0;
    if (multiplier < 1.6) return 1;
    if (multiplier < 2.0) return 2;
    return 3;
}

namespace {

// epoch seconds from integer text or ISO-8601 (YYYY-MM-DD[THH:MM:SS][Z])
long long parse_timestamp(const std::string& text) {
    if (text.find('-') == std::string::npos) return std::stoll(text);
    int year, month, day, hh = 0, mm = 0, ss = 0;
    char sep = 'T';
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &year, &month, &day, &sep, &hh, &mm, &ss);
    if (n < 3) throw ConfigError("bad ISO-8601 timestamp: " + text);
    // days since epoch via civil-date arithmetic (UTC)
    long long y = year - (month <= 2 ? 1 : 0);
    long long era = (y >= 0 ? y : y - 399) / 400;
    long long yoe = y - era * 400;
    long long doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    long long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    long long days = era * 146097 + doe - 719468;
    return days * 86400 + hh * 3600 + mm * 60 + ss;
}

} // namespace

std::vector<SurgeRow> read_surge_csv(std::istream& in) {
    std::vector<SurgeRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("timestamp", 0) == 0) continue;  // header
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("surge csv: missing comma in line: " + line);
        SurgeRow row;
        try {
            row.timestamp = parse_timestamp(line.substr(0, comma));
            row.multiplier = std::stod(line.substr(comma + 1));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("surge csv: unparseable line: " + line);
        }
        rows.push_back(row);
    }
    return rows;
}

std::array<std::array<double, 4>, 4>
ingest_surge_csv(const std::vector<SurgeRow>& rows, long long max_gap_seconds) {
    if (rows.empty()) throw ConfigError("surge data: empty input");
    long long counts[4][4] = {};
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i + 1].timestamp < rows[i].timestamp)
            throw ConfigError("surge data: rows not time-ordered");
        if (rows[i].multiplier < 1.0 || rows[i + 1].multiplier < 1.0)
            throw ConfigError("surge data: multiplier below 1.0");
        if (rows[i + 1].timestamp - rows[i].timestamp > max_gap_seconds) continue;
        ++counts[price_bin(rows[i].multiplier)][price_bin(rows[i + 1].multiplier)];
    }
    std::array<std::array<double, 4>, 4> P{};
    for (int i = 0; i < 4; ++i) {
        long long rowsum = counts[i][0] + counts[i][1] + counts[i][2] + counts[i][3];
        for (int j = 0; j < 4; ++j)
            P[i][j] = rowsum > 0 ? static_cast<double>(counts[i][j]) / rowsum : 0.25;
    }
    return P;
}

void RideshareConfig::validate() const {
    if (!(wait_reward < 0)) throw ConfigError("rideshare: wait_reward must be negative");
    if (!(travel_lower < travel_loc && travel_loc < travel_upper))
        throw ConfigError("rideshare: need travel_lower < loc < travel_upper");
    if (price_levels.size() != 4 || !std::is_sorted(price_levels.begin(), price_levels.end()) ||
        std::adjacent_find(price_levels.begin(), price_levels.end()) != price_levels.end())
        throw ConfigError("rideshare: price_levels must be 4 strictly increasing values");
    if (horizon < 0) throw ConfigError("rideshare: horizon must be >= 0");
    if (time_bins < 1) throw ConfigError("rideshare: time_bins must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("rideshare: gamma must lie in [0, 1)");
}

int rideshare_state(const RideshareConfig& cfg, int price_level, int t) {
    return t * static_cast<int>(cfg.price_levels.size()) + price_level;
}

int rideshare_terminal_state(const RideshareConfig& cfg) {
    return static_cast<int>(cfg.price_levels.size()) * (cfg.horizon + 1);
}

FiniteMDP build_rideshare(const RideshareConfig& cfg,
                          const std::array<std::array<double, 4>, 4>& price_transition) {
    cfg.validate();
    for (const auto& row : price_transition) {
        double s = row[0] + row[1] + row[2] + row[3];
        if (std::abs(s - 1.0) > 1e-12)
            throw ConfigError("rideshare: price transition rows must sum to 1");
    }

    const int L = static_cast<int>(cfg.price_levels.size());
    const int Tf = cfg.horizon;
    const int terminal = rideshare_terminal_state(cfg);
    const int S = terminal + 1;

    FiniteMDP mdp;
    mdp.allocate(S, 2);
    mdp.gamma = cfg.gamma;
    mdp.action_labels = {"wait", "ride"};
    mdp.state_labels.resize(S);

    std::vector<double> z =
        truncated_normal_bins(cfg.travel_loc, cfg.travel_scale, cfg.travel_lower,
                              cfg.travel_upper, cfg.time_bins);

    for (int t = 0; t <= Tf; ++t) {
        const double sat = cfg.satisfaction0 - cfg.satisfaction_step * t;
        for (int i = 0; i < L; ++i) {
            const int x = rideshare_state(cfg, i, t);
            mdp.state_labels[x] =
                "(x=" + std::to_string(cfg.price_levels[i]) + ",t=" + std::to_string(t) + ")";

            // 'ride': random reward through the travel-time bins, then done
            mdp.admissible[x].push_back(kActionRide);
            mdp.p(x, kActionRide, terminal) = 1.0;
            auto& ride_dist = mdp.rewards[x][kActionRide];
            const double fare_fixed = cfg.p_base + cfg.p_mile * cfg.distance_miles;
            for (double zj : z) {
                double fare = fare_fixed + cfg.p_min * (zj / 60.0);
                ride_dist.push_back(RewardEntry{1.0 / cfg.time_bins,
                                                sat - cfg.price_levels[i] * fare});
            }

            // 'wait' is only admissible before the forced ride at T_f
            if (t < Tf) {
                mdp.admissible[x].insert(mdp.admissible[x].begin(), kActionWait);
                for (int j = 0; j < L; ++j)
                    mdp.p(x, kActionWait, rideshare_state(cfg, j, t + 1)) = price_transition[i][j];
                mdp.rewards[x][kActionWait] = {RewardEntry{1.0, cfg.wait_reward}};
            }
        }
    }

    mdp.state_labels[terminal] = "done";
    mdp.absorbing[terminal] = 1;
    for (int a = 0; a < 2; ++a) {
        mdp.admissible[terminal].push_back(a);
        mdp.p(terminal, a, terminal) = 1.0;
        mdp.rewards[terminal][a] = {RewardEntry{1.0, 0.0}};
    }
    validate(mdp);
    return mdp;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile requires p in (0, 1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++i) {
        double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> truncated_normal_bins(double loc, double scale, double lower,
                                          double upper, int n) {
    if (n < 1) throw ConfigError("truncated_normal_bins: n must be >= 1");
    const double a = normal_cdf((lower - loc) / scale);
    const double b = normal_cdf((upper - loc) / scale);
    std::vector<double> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        double q = a + (b - a) * ((j + 0.5) / n);
        out.push_back(loc + scale * normal_quantile(q));
    }
    return out;
}

} // namespace riskrl
