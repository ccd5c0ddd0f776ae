#pragma once
// JSON helpers shared by the file readers.

#include <string>

#include <json.hpp>

#include "sbshell/geometry_io.hpp"

namespace sbshell::detail {

Eigen::Vector2d get_vec2(const nlohmann::json& j, const char* what);
NurbsCurve parse_curve(const nlohmann::json& c);
nlohmann::json curve_to_json(const NurbsCurve& c, const std::string& tag);
nlohmann::json parse_json_text(const std::string& text, const char* what);
std::string read_file(const std::string& path);
GeometryDesc geometry_from_json(const nlohmann::json& j);
nlohmann::json blocks_to_json(const std::vector<SBBlock>& blocks);

}  // namespace sbshell::detail
