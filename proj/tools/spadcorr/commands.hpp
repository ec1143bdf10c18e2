#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spadcorr::cli {

namespace fs = std::filesystem;

struct SimulateArgs {
  fs::path config;
  std::uint64_t frames = 0;
  std::optional<std::uint64_t> seed;
  bool dark = false;
  bool no_stray = false;
  fs::path out;
  unsigned workers = 1;
};

struct CalibrateArgs {
  fs::path input;
  int threshold = 200;
  fs::path out;
};

struct ReconstructArgs {
  fs::path input;
  std::string roi;  // "hw,hh" half extents, empty for the largest symmetric ROI
  std::string mode = "projection";
  std::optional<fs::path> hotmap;
  std::vector<std::string> colpairs;
  std::vector<std::string> rowpairs;
  std::vector<std::string> refs;
  std::string checkpoints;
  std::optional<std::uint64_t> max_frames;
  double memory_mb = 256;
  std::uint64_t chunk = 16384;
  fs::path out;
  unsigned workers = 1;
};

struct ProjectArgs {
  fs::path snapshot;
  std::string kind;
  std::string ref;
  std::optional<int> x1, x2, y1, y2;
  bool normalize = false;
  bool no_mask = false;
  bool keep_origin = false;
  bool fit_width = false;
  fs::path out;
};

struct SnrArgs {
  std::vector<fs::path> snapshots;
  std::optional<fs::path> input;
  std::string sweep;
  std::string roi;
  std::optional<fs::path> hotmap;
  std::optional<fs::path> config;
  std::string masks = "config";
  std::string signal;
  std::string noise;
  std::uint64_t chunk = 16384;
  fs::path out;
  unsigned workers = 1;
};

int run_simulate(const SimulateArgs& args, const std::vector<std::string>& argv);
int run_calibrate(const CalibrateArgs& args, const std::vector<std::string>& argv);
int run_reconstruct(const ReconstructArgs& args, const std::vector<std::string>& argv);
int run_project(const ProjectArgs& args, const std::vector<std::string>& argv);
int run_snr(const SnrArgs& args, const std::vector<std::string>& argv);

}  // namespace spadcorr::cli
