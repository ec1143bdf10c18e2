#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "manifest.hpp"
#include "spadcorr/errors.hpp"

namespace {

// Frozen exit codes, see docs/exit-codes.md.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitDomain = 4;

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main(int argc, char** argv) {
  using namespace spadcorr::cli;
  std::vector<std::string> args{"spadcorr"};
  args.insert(args.end(), argv + 1, argv + argc);

  CLI::App app{"Coincidence imaging with a simulated SPAD camera: simulate frames, reconstruct the joint "
               "probability distribution, project it and measure SNR."};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate SPAD frames from a config file into <out>/frames.spdf");
  simulate->add_option("config", sim.config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--frames,-M", sim.frames, "Number of frames (0 writes a header-only file)")->required();
  simulate->add_option("--seed", sim.seed, "Master seed, overrides [run] seed");
  simulate->add_flag("--dark", sim.dark, "Dark calibration run: no light, 8-bit output, same hot pixels");
  simulate->add_flag("--no-stray", sim.no_stray, "Drop the config's stray light (paired reference run)");
  simulate->add_option("--out,-o", sim.out, "Output directory")->required();
  simulate->add_option("--workers,-j", sim.workers, "Maximum worker threads")->default_val(default_workers());

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Flag hot pixels from 8-bit dark frames into <out>/hotmap.json");
  calibrate->add_option("--in,-i", cal.input, "Dark frames (SPDF, 8-bit)")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--threshold", cal.threshold, "A pixel above this count in any dark frame is hot")
      ->default_val(200);
  calibrate->add_option("--out,-o", cal.out, "Output directory")->required();

  ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Accumulate coincidences into <out>/snapshot.spja");
  reconstruct->add_option("--in,-i", rec.input, "Frames (SPDF)")->required()->check(CLI::ExistingFile);
  reconstruct->add_option("--roi", rec.roi, "ROI half extents hw,hh (default: largest symmetric ROI)");
  reconstruct->add_option("--mode", rec.mode, "full or projection")->default_val("projection");
  reconstruct->add_option("--hotmap", rec.hotmap, "Hot pixel map to apply before accumulation")
      ->check(CLI::ExistingFile);
  reconstruct->add_option("--colpair", rec.colpairs, "Column pair x1,x2 to record (repeatable)");
  reconstruct->add_option("--rowpair", rec.rowpairs, "Row pair y1,y2 to record (repeatable)");
  reconstruct->add_option("--ref", rec.refs, "Reference pixel x,y for conditional images (repeatable)");
  reconstruct->add_option("--checkpoints", rec.checkpoints, "Prefix lengths to snapshot, e.g. 1e4,3e4,1e5");
  reconstruct->add_option("--max-frames", rec.max_frames, "Stop after this many frames");
  reconstruct->add_option("--memory-mb", rec.memory_mb, "Counter memory budget for full mode")->default_val(256);
  reconstruct->add_option("--chunk", rec.chunk, "Frames per parallel chunk")->default_val(16384);
  reconstruct->add_option("--out,-o", rec.out, "Output directory")->required();
  reconstruct->add_option("--workers,-j", rec.workers, "Maximum worker threads")->default_val(default_workers());

  ProjectArgs proj;
  auto* project = app.add_subcommand("project", "Write a projection of a snapshot as PGM and CSV");
  project->add_option("--snapshot,-s", proj.snapshot, "Accumulator snapshot")->required()->check(CLI::ExistingFile);
  project
      ->add_option("--kind,-k", proj.kind,
                   "conditional, antidiag, sum, minus, colpair, rowpair, intensity, gamma or gamma-log")
      ->required();
  project->add_option("--ref", proj.ref, "Reference pixel x,y (conditional); write --ref=-15,15 for negatives");
  project->add_option("--x1", proj.x1, "First column (colpair)");
  project->add_option("--x2", proj.x2, "Second column (colpair)");
  project->add_option("--y1", proj.y1, "First row (rowpair)");
  project->add_option("--y2", proj.y2, "Second row (rowpair)");
  project->add_flag("--normalize", proj.normalize, "Normalise a conditional image to unit sum");
  project->add_flag("--no-mask", proj.no_mask, "Keep the 3x3 crosstalk block around the reference");
  project->add_flag("--keep-origin", proj.keep_origin, "Keep the self-product at the origin (antidiag)");
  project->add_flag("--fit-width", proj.fit_width, "Fit a Gaussian correlation width to the image");
  project->add_option("--out,-o", proj.out, "Output directory")->required();

  SnrArgs snr;
  auto* snr_cmd = app.add_subcommand("snr", "Measure the anti-diagonal SNR, sweep over M and compare with the model");
  snr_cmd->add_option("--snapshot,-s", snr.snapshots, "Snapshot(s) to measure (repeatable)")
      ->check(CLI::ExistingFile);
  snr_cmd->add_option("--in,-i", snr.input, "Frames (SPDF) to sweep over prefixes of")->check(CLI::ExistingFile);
  snr_cmd->add_option("--sweep", snr.sweep, "Prefix lengths for --in, e.g. 1e4,3e4,1e5,3e5,1e6");
  snr_cmd->add_option("--roi", snr.roi, "ROI half extents hw,hh for --in");
  snr_cmd->add_option("--hotmap", snr.hotmap, "Hot pixel map for --in")->check(CLI::ExistingFile);
  snr_cmd->add_option("--config,--predict-from", snr.config, "Experiment config: masks and SNR prediction")
      ->check(CLI::ExistingFile);
  snr_cmd->add_option("--masks", snr.masks, "config, default, split or rect")->default_val("config");
  snr_cmd->add_option("--signal", snr.signal, "Signal rectangles col0,row0,w,h;...");
  snr_cmd->add_option("--noise", snr.noise, "Noise rectangles col0,row0,w,h;...");
  snr_cmd->add_option("--chunk", snr.chunk, "Frames per parallel chunk")->default_val(16384);
  snr_cmd->add_option("--out,-o", snr.out, "Output directory")->required();
  snr_cmd->add_option("--workers,-j", snr.workers, "Maximum worker threads")->default_val(default_workers());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim, args);
    if (*calibrate) return run_calibrate(cal, args);
    if (*reconstruct) return run_reconstruct(rec, args);
    if (*project) return run_project(proj, args);
    if (*snr_cmd) return run_snr(snr, args);
  } catch (const spadcorr::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const spadcorr::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const spadcorr::Error& e) {
    // Config, out-of-range, unsupported-operation and resource errors all
    // mean the requested run has to be changed.
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
