#include "rnnid/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rnnid {

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::Config, what); }

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(where + ": bad value for '" + key + "': " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) config_error(where + ": unknown key '" + item.key() + "'");
}

// Constructors in the core throw InvalidArgument; surface those as config errors.
template <class F>
auto as_config(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    config_error(where + ": " + e.what());
  }
}

}  // namespace

Json to_json(const ConvexPotential& potential) {
  Json params = Json::object();
  switch (potential.kind()) {
    case PotentialKind::Quadratic: {
      Json rows = Json::array();
      const Matrix& q = potential.q();
      for (Index i = 0; i < q.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < q.cols(); ++j) row.push_back(q(i, j));
        rows.push_back(row);
      }
      params["Q"] = rows;
      break;
    }
    case PotentialKind::LeakyRelu: params["rho"] = potential.negative_slope(); break;
    case PotentialKind::ParamRelu:
      params["lambda_lo"] = potential.negative_slope();
      params["lambda_hi"] = potential.positive_slope();
      break;
  }
  return Json{{"kind", to_string(potential.kind())}, {"params", params}};
}

ConvexPotential potential_from_json(const Json& j) {
  const std::string where = "potential";
  reject_unknown(j, {"kind", "params"}, where);
  const auto kind = get<std::string>(j, "kind", where);
  const Json params = j.contains("params") ? j.at("params") : Json::object();
  return as_config(where, [&] {
    if (kind == "leaky_relu") {
      reject_unknown(params, {"rho"}, where + ".params");
      return ConvexPotential::leaky_relu(get<double>(params, "rho", where + ".params"));
    }
    if (kind == "param_relu") {
      reject_unknown(params, {"lambda_lo", "lambda_hi"}, where + ".params");
      return ConvexPotential::param_relu(get<double>(params, "lambda_lo", where + ".params"),
                                         get<double>(params, "lambda_hi", where + ".params"));
    }
    if (kind == "quadratic") {
      reject_unknown(params, {"Q"}, where + ".params");
      const auto rows = get<std::vector<std::vector<double>>>(params, "Q", where + ".params");
      if (rows.empty()) config_error(where + ": Q is empty");
      Matrix q(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) config_error(where + ": Q must be square");
        for (std::size_t k = 0; k < rows.size(); ++k) q(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
      }
      return ConvexPotential::quadratic(q);
    }
    config_error(where + ": unknown kind '" + kind + "'");
  });
}

Json to_json(const InputModel& model) {
  return Json{{"law", to_string(model.law)}, {"normalize_isotropic", model.normalize_isotropic}};
}

InputModel input_model_from_json(const Json& j) {
  const std::string where = "input";
  reject_unknown(j, {"law", "normalize_isotropic"}, where);
  const auto law = get<std::string>(j, "law", where);
  const bool normalize = get_or<bool>(j, "normalize_isotropic", true, where);
  if (law == "gaussian") return InputModel::gaussian();
  if (law == "cubed_gaussian" || law == "heavy") return InputModel::cubed_gaussian(normalize);
  config_error(where + ": unknown law '" + law + "'");
}

Json to_json(const SolverConfig& c) {
  return Json{{"step_size", c.step_size},
              {"max_iterations", c.max_iterations},
              {"stop_tol", c.stop_tol},
              {"momentum", to_string(c.momentum)},
              {"normalization", to_string(c.normalization)},
              {"step_rule", to_string(c.step_rule)}};
}

SolverConfig solver_config_from_json(const Json& j) {
  const std::string where = "solver";
  reject_unknown(j, {"step_size", "max_iterations", "stop_tol", "momentum", "normalization", "step_rule"}, where);
  SolverConfig c;
  c.step_size = get_or<double>(j, "step_size", c.step_size, where);
  c.max_iterations = get_or<int>(j, "max_iterations", c.max_iterations, where);
  c.stop_tol = get_or<double>(j, "stop_tol", c.stop_tol, where);

  const auto momentum = get_or<std::string>(j, "momentum", to_string(c.momentum), where);
  if (momentum == "nesterov_convex") c.momentum = Momentum::NesterovConvex;
  else if (momentum == "nesterov_convex_restart") c.momentum = Momentum::NesterovConvexRestart;
  else config_error(where + ": unknown momentum '" + momentum + "'");

  const auto norm = get_or<std::string>(j, "normalization", to_string(c.normalization), where);
  if (norm == "sum") c.normalization = Normalization::Sum;
  else if (norm == "mean") c.normalization = Normalization::Mean;
  else config_error(where + ": unknown normalization '" + norm + "'");

  const auto rule = get_or<std::string>(j, "step_rule", to_string(c.step_rule), where);
  if (rule == "fixed") c.step_rule = StepRule::Fixed;
  else if (rule == "inverse_lipschitz") c.step_rule = StepRule::InverseLipschitz;
  else config_error(where + ": unknown step_rule '" + rule + "'");

  as_config(where, [&] { c.validate(); return 0; });
  return c;
}

Json to_json(const TheorySettings& s) { return Json{{"delta", s.delta}, {"c", s.c}, {"c2", s.c2}}; }

TheorySettings theory_settings_from_json(const Json& j) {
  const std::string where = "theory";
  reject_unknown(j, {"delta", "c", "c2"}, where);
  TheorySettings s;
  s.delta = get_or<double>(j, "delta", s.delta, where);
  s.c = get_or<double>(j, "c", s.c, where);
  s.c2 = get_or<double>(j, "c2", s.c2, where);
  return s;
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"n", c.n},
         {"p", c.p},
         {"T", c.T},
         {"spectral_alpha", c.spectral_alpha},
         {"potential", to_json(c.potential)},
         {"input", to_json(c.input)},
         {"trials", c.trials},
         {"seed", c.seed},
         {"solver", to_json(c.solver)},
         {"theory", to_json(c.theory)},
         {"output_dir", c.output_dir}};
  if (c.beta) j["beta"] = *c.beta;
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  const std::string where = "config";
  reject_unknown(j,
                 {"n", "p", "T", "spectral_alpha", "rho", "potential", "input", "trials", "seed", "solver", "theory",
                  "output_dir", "beta"},
                 where);
  ExperimentConfig c;
  c.n = get_or<Index>(j, "n", c.n, where);
  c.p = get_or<Index>(j, "p", c.p, where);
  c.T = get_or<Index>(j, "T", c.T, where);
  c.spectral_alpha = get_or<double>(j, "spectral_alpha", c.spectral_alpha, where);
  if (j.contains("potential")) {
    if (j.contains("rho")) config_error(where + ": give either 'rho' or 'potential', not both");
    c.potential = potential_from_json(j.at("potential"));
  } else if (j.contains("rho")) {
    const double rho = get<double>(j, "rho", where);
    c.potential = as_config(where, [&] { return ConvexPotential::leaky_relu(rho); });
  }
  if (j.contains("input")) c.input = input_model_from_json(j.at("input"));
  c.trials = get_or<int>(j, "trials", c.trials, where);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);
  if (j.contains("solver")) c.solver = solver_config_from_json(j.at("solver"));
  if (j.contains("theory")) c.theory = theory_settings_from_json(j.at("theory"));
  c.output_dir = get_or<std::string>(j, "output_dir", "", where);
  if (j.contains("beta") && !j.at("beta").is_null()) c.beta = get<double>(j, "beta", where);
  as_config(where, [&] { c.validate(); return 0; });
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return experiment_config_from_json(j);
}

Json to_json(const TheoryReport& r) {
  auto opt = [](const auto& v) -> Json { return v ? Json(*v) : Json(nullptr); };
  auto finite_or_null = [](double v) -> Json { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"theta", opt(r.theta)},
              {"theta_valid", r.theta_valid},
              {"mu", r.mu},
              {"contraction", r.contraction},
              {"L_min", opt(r.L_min)},
              {"T_min", opt(r.T_min)},
              {"eta", r.eta},
              {"delta", r.delta},
              {"c", r.c},
              {"c2", r.c2},
              {"horizon", r.horizon},
              {"col_deleted_min_eigs", r.col_deleted_min_eigs},
              {"spectral_spread", finite_or_null(r.spectral_spread)},
              {"beta", r.beta},
              {"lambda", r.lambda},
              {"Lambda", r.Lambda},
              {"epsilon", r.epsilon}};
}

}  // namespace rnnid
