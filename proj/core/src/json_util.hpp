#pragma once

// JSON helpers shared by the document readers. Errors carry a line number or
// a field path.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "gdgs/error.hpp"
#include "json.hpp"

namespace gdgs::json_util {

using nlohmann::json;

inline int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline json parse_document(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string(what) + ": line " +
                                      std::to_string(line_of_offset(text, e.byte)) +
                                      ": malformed document (" + e.what() + ")");
  }
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::Parse, "field " + field + ": " + why);
}

inline const json& member(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) field_error(ctx, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(ctx + "." + key, "missing");
  return *it;
}

inline double number(const json& v, const std::string& ctx) {
  if (!v.is_number()) field_error(ctx, "expected a finite number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) field_error(ctx, "non-finite value");
  return d;
}

template <int N>
Eigen::Matrix<double, N, 1> vector_field(const json& obj, const char* key, const std::string& ctx) {
  const json& arr = member(obj, key, ctx);
  const std::string name = ctx + "." + key;
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(N)) {
    field_error(name, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(arr[i], name + "[" + std::to_string(i) + "]");
  return v;
}

template <typename Vec>
json to_array(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline void check_format(const json& doc, const char* expected) {
  const json& fmt = member(doc, "format", "document");
  if (!fmt.is_string() || fmt.get<std::string>() != expected) {
    field_error("format", std::string("expected '") + expected + "'");
  }
}

}  // namespace gdgs::json_util
