#include "fheston/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

#include "fheston/errors.hpp"
#include "json.hpp"

namespace fheston::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw UsageError("config: '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw UsageError("config: unknown key '" + key + "' in '" + std::string(section) + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

json sigma_to_json(const SigmaSpec& sigma) {
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ShiftedPowerSigma>)
          return {{"family", "shifted_power"}, {"scale", s.scale}, {"shift", s.shift}, {"exponent", s.exponent}};
        else if constexpr (std::is_same_v<S, ConstantSigma>)
          return {{"family", "constant"}, {"value", s.value}};
        else
          return {{"family", "linear"}, {"scale", s.scale}};
      },
      sigma.kind());
}

SigmaSpec sigma_from_json(const json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "shifted_power") {
    check_keys(j, "sigma", {"family", "scale", "shift", "exponent"});
    return SigmaSpec::shifted_power(j.at("scale").get<double>(), j.at("shift").get<double>(),
                                    j.at("exponent").get<double>());
  }
  if (family == "constant") {
    check_keys(j, "sigma", {"family", "value"});
    return SigmaSpec::constant(j.at("value").get<double>());
  }
  if (family == "linear") {
    check_keys(j, "sigma", {"family", "scale"});
    return SigmaSpec::linear(j.at("scale").get<double>());
  }
  throw UsageError("config: unknown sigma family '" + family + "'");
}

// +infinity is stored as null.
json bound_to_json(double x) { return std::isinf(x) ? json(nullptr) : json(x); }
double bound_from_json(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json payoff_to_json(const PayoffSpec& payoff) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CallPayoff>) {
          return {{"type", "call"}, {"strike", p.strike}};
        } else if constexpr (std::is_same_v<P, IndicatorPayoff>) {
          return {{"type", "indicator"},
                  {"lower", p.lower},
                  {"upper", bound_to_json(p.upper)},
                  {"lower_closed", p.lower_closed},
                  {"upper_closed", p.upper_closed}};
        } else if constexpr (std::is_same_v<P, StaircasePayoff>) {
          json steps = json::array();
          for (const auto& s : p.steps) steps.push_back({{"threshold", s.threshold}, {"weight", s.weight}});
          return {{"type", "staircase"}, {"steps", steps}};
        } else {
          return {{"type", "piecewise_linear"}, {"breaks", p.breaks}, {"levels", p.levels}, {"slopes", p.slopes}};
        }
      },
      payoff.kind());
}

PayoffSpec payoff_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "call") {
    check_keys(j, "payoff", {"type", "strike"});
    return PayoffSpec::call(j.at("strike").get<double>());
  }
  if (type == "indicator") {
    check_keys(j, "payoff", {"type", "lower", "upper", "lower_closed", "upper_closed"});
    bool lc = true, uc = true;
    read(j, "lower_closed", lc);
    read(j, "upper_closed", uc);
    return PayoffSpec::indicator(j.at("lower").get<double>(), bound_from_json(j.at("upper")), lc, uc);
  }
  if (type == "staircase") {
    check_keys(j, "payoff", {"type", "steps"});
    std::vector<StaircasePayoff::Step> steps;
    for (const auto& s : j.at("steps")) {
      check_keys(s, "payoff.steps", {"threshold", "weight"});
      steps.push_back({s.at("threshold").get<double>(), s.at("weight").get<double>()});
    }
    return PayoffSpec::staircase(std::move(steps));
  }
  if (type == "piecewise_linear") {
    check_keys(j, "payoff", {"type", "breaks", "levels", "slopes"});
    return PayoffSpec::piecewise_linear(j.at("breaks").get<std::vector<double>>(),
                                        j.at("levels").get<std::vector<double>>(),
                                        j.at("slopes").get<std::vector<double>>());
  }
  throw UsageError("config: unknown payoff type '" + type + "'");
}

json to_json(const RunConfig& c) {
  const auto& m = c.model;
  return {
      {"model",
       {{"mu", m.mu},
        {"kappa", m.kappa},
        {"theta", m.theta},
        {"nu", m.nu},
        {"hurst", m.hurst},
        {"rho", m.rho},
        {"lambda", m.lambda},
        {"s0", m.s0},
        {"y0", m.y0},
        {"horizon", m.horizon}}},
      {"sigma", sigma_to_json(c.sigma)},
      {"payoff", payoff_to_json(c.payoff)},
      {"n", c.n},
      {"grid_sizes", c.grid_sizes},
      {"paths", c.paths},
      {"estimates", c.estimates},
      {"seed", c.seed},
      {"estimator", to_string(c.estimator)},
      {"scale", c.scale},
      {"threads", c.threads},
      {"out_dir", c.out_dir},
      {"write_estimates", c.write_estimates},
      {"converge", {{"ladder", c.converge.ladder}, {"paths", c.converge.paths}}},
      {"validate",
       {{"moment_order", c.validate.moment_order},
        {"covariance_steps", c.validate.covariance_steps},
        {"covariance_paths", c.validate.covariance_paths},
        {"isometry_steps", c.validate.isometry_steps},
        {"scheme_steps", c.validate.scheme_steps},
        {"moment_paths", c.validate.moment_paths},
        {"moment_steps", c.validate.moment_steps}}},
  };
}

RunConfig from_json(const json& j) {
  check_keys(j, "config",
             {"model", "sigma", "payoff", "n", "grid_sizes", "paths", "estimates", "seed", "estimator", "scale",
              "threads", "out_dir", "write_estimates", "converge", "validate"});
  RunConfig c;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "model", {"mu", "kappa", "theta", "nu", "hurst", "rho", "lambda", "s0", "y0", "horizon"});
    read(m, "mu", c.model.mu);
    read(m, "kappa", c.model.kappa);
    read(m, "theta", c.model.theta);
    read(m, "nu", c.model.nu);
    read(m, "hurst", c.model.hurst);
    read(m, "rho", c.model.rho);
    read(m, "lambda", c.model.lambda);
    read(m, "s0", c.model.s0);
    read(m, "y0", c.model.y0);
    read(m, "horizon", c.model.horizon);
  }
  if (j.contains("sigma")) c.sigma = sigma_from_json(j.at("sigma"));
  if (j.contains("payoff")) c.payoff = payoff_from_json(j.at("payoff"));
  read(j, "n", c.n);
  read(j, "grid_sizes", c.grid_sizes);
  read(j, "paths", c.paths);
  read(j, "estimates", c.estimates);
  read(j, "seed", c.seed);
  if (j.contains("estimator")) c.estimator = estimator_from_string(j.at("estimator").get<std::string>());
  read(j, "scale", c.scale);
  read(j, "threads", c.threads);
  read(j, "out_dir", c.out_dir);
  read(j, "write_estimates", c.write_estimates);
  if (j.contains("converge")) {
    const auto& cv = j.at("converge");
    check_keys(cv, "converge", {"ladder", "paths"});
    read(cv, "ladder", c.converge.ladder);
    read(cv, "paths", c.converge.paths);
  }
  if (j.contains("validate")) {
    const auto& v = j.at("validate");
    check_keys(v, "validate",
               {"moment_order", "covariance_steps", "covariance_paths", "isometry_steps", "scheme_steps",
                "moment_paths", "moment_steps"});
    read(v, "moment_order", c.validate.moment_order);
    read(v, "covariance_steps", c.validate.covariance_steps);
    read(v, "covariance_paths", c.validate.covariance_paths);
    read(v, "isometry_steps", c.validate.isometry_steps);
    read(v, "scheme_steps", c.validate.scheme_steps);
    read(v, "moment_paths", c.validate.moment_paths);
    read(v, "moment_steps", c.validate.moment_steps);
  }
  return c;
}

}  // namespace

std::string to_json_string(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig from_json_string(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write config file '" + path.string() + "'");
  out << to_json_string(config);
}

PayoffSpec payoff_from_name(const std::string& name, double strike) {
  if (name == "call") return PayoffSpec::call(strike);
  if (name == "indicator") return PayoffSpec::reference_indicator();
  if (name == "staircase") return PayoffSpec::reference_staircase();
  throw UsageError("unknown payoff '" + name + "' (expected call, indicator or staircase)");
}

}  // namespace fheston::cli
