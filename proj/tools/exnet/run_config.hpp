#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace exnet::cli {

// Effective settings of one command: a flag given on the command line wins,
// then the --config file, then the built-in default. Every value read is
// recorded so the merged view can be written next to the outputs.
class RunConfig {
 public:
  RunConfig(const CLI::App& command, const std::filesystem::path& config_file);

  // `key` uses underscores; the matching flag is --key with dashes.
  template <typename T>
  T get(const std::string& key, const T& flag_value) {
    used_.insert(key);
    T value = flag_value;
    if (!given(key) && file_.contains(key)) {
      try {
        value = file_.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw_bad_value(key, e.what());
      }
    }
    effective_[key] = value;
    return value;
  }

  bool given(const std::string& key) const;
  // Config file keys this command never read.
  std::set<std::string> unused_keys() const;
  const nlohmann::json& effective() const { return effective_; }
  void write(const std::filesystem::path& path) const;

 private:
  [[noreturn]] static void throw_bad_value(const std::string& key, const std::string& what);

  const CLI::App& command_;
  nlohmann::json file_ = nlohmann::json::object();
  nlohmann::json effective_ = nlohmann::json::object();
  std::set<std::string> used_;
};

}  // namespace exnet::cli
