#pragma once

#include "riskrl/environments.hpp"
#include "riskrl/evaluation.hpp"
#include "riskrl/inverse.hpp"

#include <array>
#include <iosfwd>
#include <string>

namespace riskrl {

// Flat key-value record with the exact field names family, k_minus, k_plus,
// zeta_minus, zeta_plus, lambda, kappa, epsilon, y0, v0.
std::string spec_to_json(const ValueFnSpec& spec);
ValueFnSpec spec_from_json(const std::string& text);

// Structured document with states, actions, admissible, transition (dense
// row-major), rewards as {x, a, entries: [{prob, r}]}, gamma, absorbing.
std::string mdp_to_json(const FiniteMDP& mdp);
FiniteMDP mdp_from_json(const std::string& text);

std::string qtable_to_json(const QTable& q);
QTable qtable_from_json(const std::string& text);

std::string policy_to_json(const Policy& pi);
Policy policy_from_json(const std::string& text);

// Line-delimited records {"episode": int, "t": int, "x": int, "a": int}.
void demos_to_jsonl(const DemonstrationSet& demos, std::ostream& out);
DemonstrationSet demos_from_jsonl(std::istream& in, int n_states, int n_actions);

std::string rideshare_config_to_json(const RideshareConfig& cfg);
RideshareConfig rideshare_config_from_json(const std::string& text);

std::string price_matrix_to_json(const std::array<std::array<double, 4>, 4>& m);
std::array<std::array<double, 4>, 4> price_matrix_from_json(const std::string& text);

std::string irl_result_to_json(const IRLResult& result);

// CSV reports: per-state TV (state,tv) and sweep (size,mean_tv,ci_lo,ci_hi).
std::string tv_report_to_csv(const TVReport& rep);
std::string sweep_to_csv(const SweepResult& sweep);
std::string sweep_summary_to_json(const SweepResult& sweep);

// File helpers.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// FNV-1a hash of a file's bytes, as 16 hex digits; used for the artifact
/// checksums recorded in run manifests.
std::string file_checksum(const std::string& path);

} // namespace riskrl
