#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vaoi/core_model.hpp"
#include "vaoi/estimation.hpp"
#include "vaoi/mdp_solver.hpp"
#include "vaoi/policy.hpp"
#include "vaoi/qlearning.hpp"
#include "vaoi/simulator.hpp"

namespace vaoi {

using json = nlohmann::ordered_json;

json to_json(const SystemParams& params);
SystemParams system_params_from_json(const json& j);
json to_json(const State& s);
json to_json(const ThresholdProfile& profile);
json to_json(const EvalReport& report);

/// Shortest decimal that round-trips the double (%.17g).
std::string format_double(double x);

/// Grid layout: one row per Δ, one column per battery level, 0 idle / 1 transmit.
std::string policy_grid_csv(const SystemParams& params, const Policy& policy);

/// Policy and relative values in canonical order, with the manifest embedded.
json solution_json(const SystemParams& params, const SolveResult<double>& result,
                   const json& manifest);

json qtable_json(const QTable& table, const json& manifest);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string estimation_csv(const EstimationReport& report);
std::string learning_curve_csv(const QLearningReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vaoi
