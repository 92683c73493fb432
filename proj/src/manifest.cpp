#include "hclass/manifest.hpp"

#include <cstdio>
#include <ctime>

#include <nlohmann/json.hpp>

#include "hclass/csv.hpp"
#include "hclass/rng.hpp"

namespace hclass {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json deterministic_fields(const RunManifest& m) {
  json j;
  j["tool"] = m.tool;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["taxonomy_hash"] = m.taxonomy_hash;
  j["dataset_hash"] = m.dataset_hash;
  j["topology"] = m.topology;
  j["learner"] = m.learner;
  j["rule"] = m.rule;
  j["config"] = m.config;
  return j;
}

}  // namespace

std::string RunManifest::hash() const {
  return hex64(fnv1a64(deterministic_fields(*this).dump()));
}

std::string RunManifest::to_json() const {
  json j = deterministic_fields(*this);
  j["hash"] = hash();
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

std::string hash_file(const std::string& path) {
  return hex64(fnv1a64(read_entire_file(path)));
}

std::string current_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace hclass
