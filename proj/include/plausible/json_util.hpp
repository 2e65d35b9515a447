#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "plausible/geometry.hpp"

namespace plausible {

using Json = nlohmann::ordered_json;

// Field accessors that raise SchemaViolation naming the offending field.
const Json& require(const Json& obj, std::string_view key, std::string_view context);
double as_number(const Json& j, std::string_view field);
std::string as_string(const Json& j, std::string_view field);
Vec3 as_vec3(const Json& j, std::string_view field);
void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

Json to_json(const Vec3& v);
Json to_json(const Obb3D& box);
Obb3D obb_from_json(const Json& j, std::string_view context);

Json read_json_file(const std::filesystem::path& path);
// Writes `j.dump(2)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace plausible
