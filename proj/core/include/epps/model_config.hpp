#pragma once

// Flat key=value configuration files. Blank lines and '#' comments are ignored.
//
// Model keys use the prefixes cross., auto_i., auto_j. with
//   a   delta weight          b   exponential weight
//   c   shorthand: delta weight if xi = 0, exponential weight otherwise
//   xi  width [s]             tau lag [s] (cross only)
// Missing auto kernels default to unit Brownian motion; a missing cross kernel is zero.

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "epps/kernels.hpp"

namespace epps {

using KeyValues = std::map<std::string, std::string>;

/// Parses key=value lines; throws DataError with the line number on malformed input or a
/// repeated key.
KeyValues parse_key_values(std::istream& in, const std::string& source = "<input>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Typed accessors; throw DataError naming the key on conversion failure.
double get_double(const KeyValues& kv, const std::string& key, double fallback);
long long get_int(const KeyValues& kv, const std::string& key, long long fallback);
std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback);
bool get_bool(const KeyValues& kv, const std::string& key, bool fallback);
std::vector<double> get_double_list(const KeyValues& kv, const std::string& key, const std::vector<double>& fallback);
std::vector<std::string> get_string_list(const KeyValues& kv, const std::string& key,
                                         const std::vector<std::string>& fallback);

CorrelationModel model_from_keys(const KeyValues& kv, const std::string& prefix, const CorrelationModel& fallback);
ModelPair pair_from_keys(const KeyValues& kv);

/// Canonical text form, one key per line in sorted order.
std::string to_text(const KeyValues& kv);
KeyValues pair_to_keys(const ModelPair& pair);

}  // namespace epps
