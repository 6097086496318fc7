#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qsatlab/error.hpp"

namespace qsat {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

/// Compact single-line dump, newline-terminated.
inline std::string dump_json(const json& j) { return j.dump() + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, dump_json(j));
}

namespace detail {

/// Fetches a required member, reporting the field path on failure.
inline const json& field(const json& j, const char* key,
                         const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return *it;
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline std::complex<double> complex_from_json(const json& j,
                                              const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw ParseError(where + ": expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_to_json(std::complex<double> z) {
  return json::array({z.real(), z.imag()});
}

/// Finite doubles as numbers, infinities and NaN as null.
inline json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace detail
}  // namespace qsat
