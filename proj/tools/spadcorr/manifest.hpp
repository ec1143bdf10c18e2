#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace spadcorr::cli {

/// Run record written next to the outputs of every subcommand. Holds no
/// timestamps or host details so that identical runs give identical files.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv);

  nlohmann::ordered_json& inputs() noexcept { return json_["inputs"]; }
  nlohmann::ordered_json& parameters() noexcept { return json_["parameters"]; }
  nlohmann::ordered_json& results() noexcept { return json_["results"]; }
  /// Records the resolved experiment config (a JSON object as text).
  void set_config(const std::string& config_json);
  void add_warning(const std::string& text);
  /// `file` is relative to the output directory.
  void add_output(const std::filesystem::path& out_dir, const std::string& file);

  /// Writes `<out_dir>/manifest.json`.
  void write(const std::filesystem::path& out_dir) const;

 private:
  nlohmann::ordered_json json_;
};

std::string tool_version();

}  // namespace spadcorr::cli
