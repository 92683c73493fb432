#ifndef HCLASS_MANIFEST_HPP_
#define HCLASS_MANIFEST_HPP_

#include <cstdint>
#include <map>
#include <string>

namespace hclass {

// Reproducibility record written next to every command's outputs. The hash
// covers only deterministic fields (not the timestamp) and is embedded in
// each emitted artifact, so reruns with the same inputs produce byte-equal
// artifacts that still point back at their manifest.
struct RunManifest {
  std::string tool = "hclass 0.1.0";
  std::string command;
  std::uint64_t seed = 0;
  std::string taxonomy_hash;
  std::string dataset_hash;
  std::string topology;
  std::string learner;
  std::string rule;
  std::map<std::string, std::string> config;
  std::string timestamp;

  std::string hash() const;
  std::string to_json() const;  // includes the hash and timestamp
};

std::string hash_file(const std::string& path);
std::string current_timestamp();

}  // namespace hclass

#endif  // HCLASS_MANIFEST_HPP_
