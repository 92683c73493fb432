#ifndef HCLASS_CONFIG_HPP_
#define HCLASS_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hclass {

// Flat key=value file; '#' starts a comment, blank lines ignored. Unknown
// keys are rejected so typos surface early. Precedence for the seed:
// --seed flag > config file > HCLASS_SEED env var > default.
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

// Seed resolution helper; `flag` empty means the flag was not given.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Config& config,
                           std::uint64_t fallback);

}  // namespace hclass

#endif  // HCLASS_CONFIG_HPP_
