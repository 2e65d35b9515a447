#include "plausible/json_util.hpp"

#include <fstream>
#include <sstream>

#include "plausible/error.hpp"

namespace plausible {

const Json& require(const Json& obj, std::string_view key, std::string_view context) {
  if (!obj.is_object())
    throw Error(ErrorCode::SchemaViolation, std::string(context) + " must be an object");
  auto it = obj.find(std::string(key));
  if (it == obj.end())
    throw Error(ErrorCode::SchemaViolation,
                "missing field '" + std::string(context) + "." + std::string(key) + "'");
  return *it;
}

double as_number(const Json& j, std::string_view field) {
  if (!j.is_number())
    throw Error(ErrorCode::SchemaViolation, "field '" + std::string(field) + "' must be a number");
  return j.get<double>();
}

std::string as_string(const Json& j, std::string_view field) {
  if (!j.is_string())
    throw Error(ErrorCode::SchemaViolation, "field '" + std::string(field) + "' must be a string");
  return j.get<std::string>();
}

Vec3 as_vec3(const Json& j, std::string_view field) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::SchemaViolation, "field '" + std::string(field) + "' must be an array of 3 numbers");
  return {as_number(j[0], field), as_number(j[1], field), as_number(j[2], field)};
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  if (!obj.is_object())
    throw Error(ErrorCode::SchemaViolation, std::string(context) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto a : allowed) known = known || it.key() == a;
    if (!known)
      throw Error(ErrorCode::SchemaViolation,
                  "unknown key '" + std::string(context) + "." + it.key() + "'");
  }
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json to_json(const Obb3D& box) {
  Json j;
  j["center"] = to_json(box.center);
  j["half_extents"] = to_json(box.half_extents);
  j["yaw"] = box.yaw;
  return j;
}

Obb3D obb_from_json(const Json& j, std::string_view context) {
  const std::string ctx(context);
  Obb3D box;
  box.center = as_vec3(require(j, "center", ctx), ctx + ".center");
  box.half_extents = as_vec3(require(j, "half_extents", ctx), ctx + ".half_extents");
  box.yaw = as_number(require(j, "yaw", ctx), ctx + ".yaw");
  try {
    box.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaViolation, ctx + ": " + e.what());
  }
  return box;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, path.string());
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace plausible
