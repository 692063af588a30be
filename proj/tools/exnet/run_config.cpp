#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "exnet/error.hpp"

namespace exnet::cli {

RunConfig::RunConfig(const CLI::App& command, const std::filesystem::path& config_file)
    : command_(command) {
  if (config_file.empty()) return;
  std::ifstream f(config_file);
  if (!f) throw ValidationError("config", "cannot read " + config_file.string());
  std::stringstream buf;
  buf << f.rdbuf();
  file_ = nlohmann::json::parse(buf.str(), nullptr, false);
  if (file_.is_discarded() || !file_.is_object()) {
    throw ValidationError("config", config_file.string() + " is not a JSON object");
  }
}

bool RunConfig::given(const std::string& key) const {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  for (const CLI::App* app = &command_; app != nullptr; app = app->get_parent()) {
    if (const auto* opt = app->get_option_no_throw(flag); opt != nullptr) return opt->count() > 0;
  }
  return false;
}

std::set<std::string> RunConfig::unused_keys() const {
  std::set<std::string> out;
  for (const auto& [key, value] : file_.items())
    if (!used_.count(key)) out.insert(key);
  return out;
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << effective_.dump(2) << '\n';
}

void RunConfig::throw_bad_value(const std::string& key, const std::string& what) {
  throw ValidationError(key, std::string("bad value in config file: ") + what);
}

}  // namespace exnet::cli
