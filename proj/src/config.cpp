#include "hclass/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "hclass/csv.hpp"
#include "hclass/errors.hpp"

namespace hclass {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      "seed",
      "n_splits",
      "train_view_cap",
      "test_view_cap",
      "comparison.train_fraction",
      "comparison.counts_file",
      "ml.train",
      "ml.val",
      "ml.test",
      "ml.stratified",
      "grid.c",
      "grid.gamma",
      "grid.phase",
      "svm.tol",
      "softmax.learning_rate",
      "softmax.epochs",
      "softmax.l2",
      "pca.retained_variance",
      "prefix_policy",
      "synth.dim",
      "synth.separation",
      "synth.level_decay",
      "synth.alignment",
      "synth.specimen_sd",
      "synth.view_sd",
      "synth.specimens_per_leaf",
      "synth.views_per_specimen",
  };
  return keys;
}

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  const auto& known = known_keys();
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw_validation("BadConfig",
                       "line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw_validation("BadConfig",
                       "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    config.values_[key] = value;
  }
  return config;
}

Config Config::load(const std::string& path) {
  return parse(read_entire_file(path));
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw_validation("BadConfig", "key '" + key + "': bad number '" + it->second + "'");
  }
}

long Config::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw_validation("BadConfig", "key '" + key + "': bad integer '" + it->second + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw_validation("BadConfig", "key '" + key + "': bad boolean '" + it->second + "'");
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(trim(item)));
    } catch (const std::exception&) {
      throw_validation("BadConfig", "key '" + key + "': bad number '" + item + "'");
    }
  }
  if (out.empty()) {
    throw_validation("BadConfig", "key '" + key + "': empty list");
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Config& config,
                           std::uint64_t fallback) {
  if (flag) return *flag;
  if (config.has("seed")) return static_cast<std::uint64_t>(config.get_long("seed", 1));
  if (const char* env = std::getenv("HCLASS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw_validation("BadSeed", std::string("HCLASS_SEED is not an integer: ") + env);
    }
  }
  return fallback;
}

}  // namespace hclass
