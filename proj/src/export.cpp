#include "vaoi/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vaoi {

json to_json(const SystemParams& params) {
  return json{{"p_g", params.p_g},
              {"p_s", params.p_s},
              {"beta", params.beta},
              {"B", params.B},
              {"delta_max", params.delta_max}};
}

SystemParams system_params_from_json(const json& j) {
  SystemParams p;
  p.p_g = j.at("p_g").get<double>();
  p.p_s = j.at("p_s").get<double>();
  p.beta = j.at("beta").get<double>();
  p.B = j.at("B").get<int>();
  p.delta_max = j.at("delta_max").get<int>();
  return p;
}

json to_json(const State& s) { return json::array({s.delta, s.b}); }

json to_json(const ThresholdProfile& profile) {
  json thresholds = json::array();
  for (const auto& t : profile.threshold) {
    thresholds.push_back(t ? json(*t) : json("never"));
  }
  json ok = json::array();
  for (bool v : profile.is_threshold) ok.push_back(v);
  return json{{"threshold_by_battery", thresholds},
              {"is_threshold_by_battery", ok},
              {"holds", profile.holds()}};
}

json to_json(const EvalReport& r) {
  return json{{"mean_vaoi", r.mean_vaoi},
              {"std_error", r.std_error},
              {"runs", r.runs},
              {"horizon", r.horizon},
              {"ci99", json::array({r.ci99_lo, r.ci99_hi})}};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string policy_grid_csv(const SystemParams& params, const Policy& policy) {
  if (policy.size() != params.num_states()) {
    throw std::invalid_argument("policy_grid_csv: policy does not cover the grid");
  }
  std::ostringstream os;
  os << "delta";
  for (int b = 0; b <= params.B; ++b) os << ",b" << b;
  os << '\n';
  for (int d = 0; d <= params.delta_max; ++d) {
    os << d;
    for (int b = 0; b <= params.B; ++b) os << ',' << to_int(policy.at(params, {d, b}));
    os << '\n';
  }
  return os.str();
}

json solution_json(const SystemParams& params, const SolveResult<double>& result,
                   const json& manifest) {
  json states = json::array();
  json actions = json::array();
  json values = json::array();
  for (std::size_t i = 0; i < params.num_states(); ++i) {
    states.push_back(to_json(state_at(params, i)));
    actions.push_back(to_int(result.policy[i]));
    values.push_back(result.value(static_cast<Eigen::Index>(i)));
  }
  return json{{"params", to_json(params)},
              {"state_order", "delta-major, b-minor"},
              {"avg_vaoi", result.avg_cost},
              {"iterations", result.iterations},
              {"span_residual", result.span_residual},
              {"states", states},
              {"policy", actions},
              {"relative_value", values},
              {"threshold_profile", to_json(threshold_profile(result.policy, params))},
              {"manifest", manifest}};
}

json qtable_json(const QTable& table, const json& manifest) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < table.q.rows(); ++i) {
    rows.push_back(json{{"state", to_json(table.state(i))},
                        {"q", json::array({table.q(i, 0), table.q(i, 1)})},
                        {"visits", json::array({table.visits(i, 0), table.visits(i, 1)})}});
  }
  return json{{"delta_max", table.delta_max},
              {"B", table.B},
              {"state_order", "delta-major, b-minor"},
              {"lambda_hat", table.lambda_hat},
              {"ref_state", to_json(table.ref_state)},
              {"total_visits", table.total_visits()},
              {"entries", rows},
              {"manifest", manifest}};
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "p_g,p_s,beta,B,delta_max,policy,evaluator,avg_vaoi,std_error,solver_iterations,status,"
        "error\n";
  for (const auto& r : rows) {
    std::string error = r.error;
    for (char& c : error) {
      if (c == ',' || c == '\n') c = ';';
    }
    os << format_double(r.params.p_g) << ',' << format_double(r.params.p_s) << ','
       << format_double(r.params.beta) << ',' << r.params.B << ',' << r.params.delta_max << ','
       << to_string(r.source) << ',' << to_string(r.evaluator) << ','
       << format_double(r.avg_vaoi) << ',' << format_double(r.std_error) << ','
       << r.solver_iterations << ',' << (r.ok ? "ok" : "failed") << ',' << error << '\n';
  }
  return os.str();
}

std::string estimation_csv(const EstimationReport& report) {
  std::ostringstream os;
  os << "episode,p_g_hat,p_s_hat,exact_avg_vaoi,mc_avg_vaoi,solver_iterations,model_p_g,model_p_s\n";
  for (const auto& e : report.episodes) {
    os << e.episode << ',' << format_double(e.raw.p_g) << ',' << format_double(e.raw.p_s) << ','
       << format_double(e.exact_avg_vaoi) << ',' << format_double(e.mc_avg_vaoi) << ','
       << e.solver_iterations << ',' << format_double(e.model.p_g) << ','
       << format_double(e.model.p_s) << '\n';
  }
  return os.str();
}

std::string learning_curve_csv(const QLearningReport& report) {
  std::ostringstream os;
  os << "episode,lambda_hat,exact_avg_vaoi,mc_avg_vaoi,epsilon,behaviour_avg_vaoi\n";
  for (const auto& r : report.curve) {
    os << r.episode << ',' << format_double(r.lambda_hat) << ',' << format_double(r.exact_avg_vaoi)
       << ',' << format_double(r.mc_avg_vaoi) << ',' << format_double(r.epsilon) << ','
       << format_double(r.behaviour_avg_vaoi) << '\n';
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace vaoi
