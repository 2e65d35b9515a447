#include "plausible/config.hpp"

#include "plausible/error.hpp"

namespace plausible {
namespace {

template <class T>
void read_into(const Json& obj, const char* key, T& field, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string name = ctx + "." + key;
  if constexpr (std::is_same_v<T, int>) {
    if (!it->is_number_integer()) throw Error(ErrorCode::SchemaViolation, "'" + name + "' must be an integer");
    field = it->template get<int>();
  } else {
    field = as_number(*it, name);
  }
}

}  // namespace

void SelectionPolicy::validate() const {
  for (const auto& [cat, area] : area_thresholds)
    if (!(area > 0))
      throw Error(ErrorCode::SchemaViolation, "policy.area_thresholds." + cat + " must be positive");
}

void PipelineConfig::validate() const {
  plane.validate();
  horizontal.validate();
  insertion.validate();
  if (!(lighting.gamma > 0)) throw Error(ErrorCode::SchemaViolation, "lighting.gamma must be positive");
  policy.validate();
  if (categories.empty()) throw Error(ErrorCode::SchemaViolation, "categories must not be empty");
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig cfg;
  reject_unknown_keys(j, {"seed", "categories", "plane_extraction", "horizontal", "insertion", "lighting", "policy"},
                      "config");
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      throw Error(ErrorCode::SchemaViolation, "'config.seed' must be a non-negative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("categories"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::SchemaViolation, "'config.categories' must be an array");
    cfg.categories.clear();
    for (const auto& c : *it) cfg.categories.push_back(as_string(c, "config.categories[]"));
  }
  if (auto it = j.find("plane_extraction"); it != j.end()) {
    const std::string ctx = "plane_extraction";
    reject_unknown_keys(*it, {"block_size", "mse_threshold", "grow_distance", "min_inliers", "depth_discontinuity",
                              "min_block_fill"},
                        ctx);
    read_into(*it, "block_size", cfg.plane.block_size, ctx);
    read_into(*it, "mse_threshold", cfg.plane.mse_threshold, ctx);
    read_into(*it, "grow_distance", cfg.plane.grow_distance, ctx);
    read_into(*it, "min_inliers", cfg.plane.min_inliers, ctx);
    read_into(*it, "depth_discontinuity", cfg.plane.depth_discontinuity, ctx);
    read_into(*it, "min_block_fill", cfg.plane.min_block_fill, ctx);
  }
  if (auto it = j.find("horizontal"); it != j.end()) {
    reject_unknown_keys(*it, {"normal_tolerance_deg", "z_std_threshold"}, "horizontal");
    read_into(*it, "normal_tolerance_deg", cfg.horizontal.normal_tolerance_deg, "horizontal");
    read_into(*it, "z_std_threshold", cfg.horizontal.z_std_threshold, "horizontal");
  }
  if (auto it = j.find("insertion"); it != j.end()) {
    reject_unknown_keys(*it, {"k", "r_max", "min_height"}, "insertion");
    read_into(*it, "k", cfg.insertion.k, "insertion");
    read_into(*it, "r_max", cfg.insertion.r_max, "insertion");
    read_into(*it, "min_height", cfg.insertion.min_height, "insertion");
  }
  if (auto it = j.find("lighting"); it != j.end()) {
    reject_unknown_keys(*it, {"gamma", "completion"}, "lighting");
    read_into(*it, "gamma", cfg.lighting.gamma, "lighting");
    if (auto c = it->find("completion"); c != it->end()) {
      if (c->is_string() && c->get<std::string>() == "replicate_horizon") {
        cfg.lighting.completion = CompletionPolicy::replicate_horizon();
      } else if (c->is_object() && c->size() == 1 && c->contains("constant")) {
        cfg.lighting.completion =
            CompletionPolicy::constant(static_cast<float>(as_number(c->at("constant"), "lighting.completion.constant")));
      } else {
        throw Error(ErrorCode::SchemaViolation,
                    "'lighting.completion' must be \"replicate_horizon\" or {\"constant\": value}");
      }
    }
  }
  if (auto it = j.find("policy"); it != j.end()) {
    reject_unknown_keys(*it, {"kind", "area_thresholds"}, "policy");
    const std::string kind = as_string(require(*it, "kind", "policy"), "policy.kind");
    if (kind == "uniform_random") {
      cfg.policy.kind = SelectionPolicy::Kind::UniformRandom;
    } else if (kind == "floor_size_gated") {
      cfg.policy.kind = SelectionPolicy::Kind::FloorSizeGated;
    } else {
      throw Error(ErrorCode::SchemaViolation, "unknown policy.kind '" + kind + "'");
    }
    if (auto t = it->find("area_thresholds"); t != it->end()) {
      if (!t->is_object()) throw Error(ErrorCode::SchemaViolation, "policy.area_thresholds must be an object");
      for (auto e = t->begin(); e != t->end(); ++e)
        cfg.policy.area_thresholds[e.key()] = as_number(e.value(), "policy.area_thresholds." + e.key());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

Json config_to_json(const PipelineConfig& cfg) {
  Json j;
  if (cfg.seed) j["seed"] = *cfg.seed;
  else j["seed"] = nullptr;
  j["categories"] = cfg.categories;
  j["plane_extraction"] = {{"block_size", cfg.plane.block_size},
                           {"mse_threshold", cfg.plane.mse_threshold},
                           {"grow_distance", cfg.plane.grow_distance},
                           {"min_inliers", cfg.plane.min_inliers},
                           {"depth_discontinuity", cfg.plane.depth_discontinuity},
                           {"min_block_fill", cfg.plane.min_block_fill}};
  j["horizontal"] = {{"normal_tolerance_deg", cfg.horizontal.normal_tolerance_deg},
                     {"z_std_threshold", cfg.horizontal.z_std_threshold}};
  j["insertion"] = {{"k", cfg.insertion.k}, {"r_max", cfg.insertion.r_max}, {"min_height", cfg.insertion.min_height}};
  Json lighting;
  lighting["gamma"] = cfg.lighting.gamma;
  if (cfg.lighting.completion.kind == CompletionPolicy::Kind::ReplicateHorizon)
    lighting["completion"] = "replicate_horizon";
  else
    lighting["completion"] = {{"constant", cfg.lighting.completion.value}};
  j["lighting"] = lighting;
  Json policy;
  policy["kind"] = cfg.policy.kind == SelectionPolicy::Kind::UniformRandom ? "uniform_random" : "floor_size_gated";
  Json thresholds = Json::object();
  for (const auto& [k, v] : cfg.policy.area_thresholds) thresholds[k] = v;
  policy["area_thresholds"] = thresholds;
  j["policy"] = policy;
  return j;
}

}  // namespace plausible
