#include "manifest.hpp"

#include <fstream>

#include "spadcorr/errors.hpp"

#ifndef SPADCORR_VERSION
#define SPADCORR_VERSION "unknown"
#endif

namespace spadcorr::cli {

std::string tool_version() { return SPADCORR_VERSION; }

Manifest::Manifest(std::string command, std::vector<std::string> argv) {
  json_["tool"] = "spadcorr";
  json_["version"] = tool_version();
  json_["command"] = std::move(command);
  json_["argv"] = std::move(argv);
  json_["inputs"] = nlohmann::ordered_json::object();
  json_["parameters"] = nlohmann::ordered_json::object();
  json_["config"] = nullptr;
  json_["results"] = nlohmann::ordered_json::object();
  json_["warnings"] = nlohmann::ordered_json::array();
  json_["outputs"] = nlohmann::ordered_json::array();
}

void Manifest::set_config(const std::string& config_json) {
  json_["config"] = nlohmann::ordered_json::parse(config_json);
}

void Manifest::add_warning(const std::string& text) { json_["warnings"].push_back(text); }

void Manifest::add_output(const std::filesystem::path& out_dir, const std::string& file) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(out_dir / file, ec);
  json_["outputs"].push_back({{"file", file}, {"bytes", ec ? 0 : bytes}});
}

void Manifest::write(const std::filesystem::path& out_dir) const {
  const auto path = out_dir / "manifest.json";
  std::ofstream out(path);
  if (!out) throw IoError(IoError::Kind::Open, "cannot write " + path.string());
  out << json_.dump(2) << '\n';
  if (!out) throw IoError(IoError::Kind::Write, "failed writing " + path.string());
}

}  // namespace spadcorr::cli
