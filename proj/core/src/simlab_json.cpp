#include <nlohmann/json.hpp>
#include <set>

#include "sdid/error.hpp"
#include "sdid/simlab.hpp"

namespace sdid::sim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw UsageError(where + "." + key + " must be a number");
  return v.get<double>();
}

template <typename Int>
Int integer_or(const json& obj, const char* key, Int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw UsageError(where + "." + key + " must be a non-negative integer");
  }
  return v.get<Int>();
}

NoiseDistribution parse_distribution(const std::string& name) {
  if (name == "gaussian") return NoiseDistribution::Gaussian;
  if (name == "uniform") return NoiseDistribution::Uniform;
  if (name == "student_t") return NoiseDistribution::StudentT;
  throw UsageError("unknown noise distribution '" + name + "' (gaussian, uniform, student_t)");
}

NoiseProcess parse_process(const std::string& name) {
  if (name == "independent") return NoiseProcess::Independent;
  if (name == "random_walk") return NoiseProcess::RandomWalk;
  throw UsageError("unknown noise process '" + name + "' (independent, random_walk)");
}

}  // namespace

json to_json(const DgpSpec& spec) {
  json levels = json::array();
  for (const auto& level : spec.levels) {
    levels.push_back({{"name", level.name},
                      {"probability", level.probability},
                      {"alpha", level.alpha},
                      {"delta", level.delta},
                      {"beta", level.beta}});
  }
  json doc = {{"levels", levels},
              {"tau", spec.tau},
              {"shock", spec.shock},
              {"noise",
               {{"distribution", to_string(spec.noise.distribution)},
                {"df", spec.noise.df},
                {"sd_pre", spec.noise.sd_pre},
                {"sd_post", spec.noise.sd_post},
                {"sd_unit", spec.noise.sd_unit}}},
              {"n", spec.n},
              {"seed", spec.seed}};
  if (spec.periods) {
    doc["periods"] = {{"count", spec.periods->count},
                      {"treatment_time", spec.periods->treatment_time},
                      {"process", to_string(spec.periods->process)}};
  }
  return doc;
}

DgpSpec dgp_from_json(const json& doc) {
  reject_unknown(doc, {"levels", "tau", "shock", "noise", "n", "seed", "periods"}, "dgp");
  DgpSpec spec;
  if (!doc.contains("levels") || !doc.at("levels").is_array()) {
    throw UsageError("dgp.levels must be an array of level objects");
  }
  for (const auto& item : doc.at("levels")) {
    reject_unknown(item, {"name", "probability", "alpha", "delta", "beta"}, "dgp.levels[]");
    if (!item.contains("name") || !item.at("name").is_string()) {
      throw UsageError("dgp.levels[].name must be a string");
    }
    LevelSpec level;
    level.name = item.at("name").get<std::string>();
    const std::string where = "dgp.levels[" + level.name + "]";
    if (!item.contains("probability")) throw UsageError(where + ".probability is required");
    level.probability = number_or(item, "probability", 0.0, where);
    level.alpha = number_or(item, "alpha", 0.0, where);
    level.delta = number_or(item, "delta", 0.0, where);
    level.beta = number_or(item, "beta", 0.0, where);
    spec.levels.push_back(std::move(level));
  }
  spec.tau = number_or(doc, "tau", 0.0, "dgp");
  spec.shock = number_or(doc, "shock", 0.0, "dgp");
  if (!doc.contains("n")) throw UsageError("dgp.n is required");
  spec.n = integer_or<std::size_t>(doc, "n", 1, "dgp");
  spec.seed = integer_or<std::uint64_t>(doc, "seed", 0, "dgp");

  if (doc.contains("noise")) {
    const auto& noise = doc.at("noise");
    reject_unknown(noise, {"distribution", "df", "sd_pre", "sd_post", "sd_unit"}, "dgp.noise");
    if (noise.contains("distribution")) {
      if (!noise.at("distribution").is_string()) {
        throw UsageError("dgp.noise.distribution must be a string");
      }
      spec.noise.distribution = parse_distribution(noise.at("distribution").get<std::string>());
    }
    spec.noise.df = number_or(noise, "df", spec.noise.df, "dgp.noise");
    spec.noise.sd_pre = number_or(noise, "sd_pre", spec.noise.sd_pre, "dgp.noise");
    spec.noise.sd_post = number_or(noise, "sd_post", spec.noise.sd_post, "dgp.noise");
    spec.noise.sd_unit = number_or(noise, "sd_unit", spec.noise.sd_unit, "dgp.noise");
  }

  if (doc.contains("periods")) {
    const auto& periods = doc.at("periods");
    reject_unknown(periods, {"count", "treatment_time", "process"}, "dgp.periods");
    PeriodSpec p;
    p.count = integer_or<std::size_t>(periods, "count", p.count, "dgp.periods");
    p.treatment_time = integer_or<long>(periods, "treatment_time", p.treatment_time, "dgp.periods");
    if (periods.contains("process")) {
      if (!periods.at("process").is_string()) throw UsageError("dgp.periods.process must be a string");
      p.process = parse_process(periods.at("process").get<std::string>());
    }
    spec.periods = p;
  }

  spec.validate();
  return spec;
}

}  // namespace sdid::sim
