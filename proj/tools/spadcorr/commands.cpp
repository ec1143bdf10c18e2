#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "manifest.hpp"
#include "spadcorr/accumulator.hpp"
#include "spadcorr/errors.hpp"
#include "spadcorr/hot_pixels.hpp"
#include "spadcorr/projections.hpp"
#include "spadcorr/reconstruct.hpp"
#include "spadcorr/scene_io.hpp"
#include "spadcorr/simulator.hpp"
#include "spadcorr/snr.hpp"
#include "spadcorr/spdf.hpp"
#include "spadcorr/width.hpp"

namespace spadcorr::cli {

namespace {

using nlohmann::ordered_json;

std::vector<std::string> split_fields(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  return parts;
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": '" + text + "' is not an integer");
}

std::pair<int, int> parse_pair(const std::string& text, const std::string& what) {
  const auto f = split_fields(text);
  if (f.size() != 2) throw ConfigError(what + " expects two comma-separated integers, got '" + text + "'");
  return {parse_int(f[0], what), parse_int(f[1], what)};
}

// Accepts 1e4-style counts, since sweeps are usually written that way.
std::vector<std::uint64_t> parse_counts(const std::string& text, const std::string& what) {
  std::vector<std::uint64_t> out;
  if (boost::trim_copy(text).empty()) return out;
  for (const auto& f : split_fields(text)) {
    double v = -1.0;
    try {
      std::size_t used = 0;
      v = std::stod(f, &used);
      if (used != f.size()) v = -1.0;
    } catch (const std::exception&) {
    }
    if (!(v >= 0.0) || v > 9.0e15 || std::floor(v) != v) {
      throw ConfigError(what + ": '" + f + "' is not a non-negative integer frame count");
    }
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

SensorGeometry geometry_for(int width, int height, const std::string& roi) {
  if (roi.empty()) return SensorGeometry::centered(width, height);
  const auto [hw, hh] = parse_pair(roi, "--roi");
  return SensorGeometry::centered(width, height, hw, hh);
}

AccumulationMode parse_mode(const std::string& text) {
  const auto m = boost::to_lower_copy(text);
  if (m == "full") return AccumulationMode::Full;
  if (m == "projection" || m == "projection_only") return AccumulationMode::ProjectionOnly;
  throw ConfigError("--mode must be full or projection, got '" + text + "'");
}

std::string mode_name(AccumulationMode mode) { return mode == AccumulationMode::Full ? "full" : "projection"; }

ordered_json geometry_json(const SensorGeometry& g) {
  return {{"width", g.width()},
          {"height", g.height()},
          {"origin", {g.origin().col, g.origin().row}},
          {"roi", {g.roi().col0, g.roi().row0, g.roi().width, g.roi().height}}};
}

ordered_json plan_json(const ProjectionPlan& plan) {
  ordered_json j;
  j["column_pairs"] = ordered_json::array();
  for (const auto& [a, b] : plan.column_pairs) j["column_pairs"].push_back({a, b});
  j["row_pairs"] = ordered_json::array();
  for (const auto& [a, b] : plan.row_pairs) j["row_pairs"].push_back({a, b});
  j["references"] = ordered_json::array();
  for (const auto& r : plan.references) j["references"].push_back({r.x, r.y});
  return j;
}

ordered_json accumulator_json(const JpdAccumulator& acc) {
  return {{"mode", mode_name(acc.mode())},
          {"frames", acc.frames()},
          {"cross_terms", acc.cross_terms()},
          {"geometry", geometry_json(acc.geometry())},
          {"plan", plan_json(acc.options().plan)}};
}

ordered_json measurement_json(const SnrMeasurement& m) {
  return {{"frames", m.frames},
          {"snr", m.infinite ? ordered_json("inf") : ordered_json(m.snr)},
          {"snr_err", m.snr_err},
          {"signal_mean", m.signal_mean},
          {"noise_std", m.noise_std},
          {"signal_pixels", m.signal_pixels},
          {"noise_pixels", m.noise_pixels}};
}

void warn(Manifest& manifest, const std::string& text) {
  std::cerr << "warning: " << text << '\n';
  manifest.add_warning(text);
}

void write_image(const fs::path& out, const std::string& stem, const ProjectionImage& image, Manifest& manifest) {
  write_projection_pgm(out / (stem + ".pgm"), image);
  write_projection_csv(out / (stem + ".csv"), image);
  manifest.add_output(out, stem + ".pgm");
  manifest.add_output(out, stem + ".pgm.txt");
  manifest.add_output(out, stem + ".csv");
}

std::string coord_tag(int a, int b) { return std::to_string(a) + "_" + std::to_string(b); }

void print_coefficients(const SnrParameters& p) {
  std::cout << "a_t = " << ideal_coefficient(p) << " (ideal), non-ideal prediction a = " << predict_snr(p, 1.0)
            << "; eta " << p.eta << ", m " << p.mean_pairs << ", n " << p.noise_events << ", s "
            << p.illuminated_pixels << '\n';
}

// No data: report the analytic coefficients only.
int predict_only(const ExperimentConfig& cfg, const SnrArgs& a, Manifest& manifest) {
  const SnrParameters p = snr_parameters(cfg.scene, cfg.geometry);
  SnrReport report;
  report.parameters = p;
  report.n_genuine = genuine_per_frame(p);
  report.n_accidental = accidental_per_frame(p);
  report.a_ideal = ideal_coefficient(p);
  report.masks = "none";
  print_coefficients(p);
  fs::create_directories(a.out);
  write_snr_report(a.out / "snr.json", report);
  manifest.add_output(a.out, "snr.json");
  manifest.results() = {{"a_ideal", report.a_ideal},
                        {"a_predicted", predict_snr(p, 1.0)},
                        {"n_genuine", report.n_genuine},
                        {"n_accidental", report.n_accidental}};
  manifest.write(a.out);
  return 0;
}

}  // namespace

int run_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
  ExperimentConfig cfg = load_experiment(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.dark) {
    // Dark calibration run: same sensor noise and hot pixels, no light.
    cfg.scene.detection_efficiency = 0.0;
    cfg.scene.stray_light = PixelMap{};
    cfg.stray_source = "none";
    cfg.scene.bit_depth = 8;
  }
  if (a.no_stray) {
    // Stage-separated streams keep every other realisation identical.
    cfg.scene.stray_light = PixelMap{};
    cfg.stray_source = "none";
  }
  const Simulator sim(cfg.scene, cfg.geometry, RngPolicy{cfg.seed});

  Manifest manifest("simulate", argv);
  manifest.inputs()["config"] = a.config.string();
  manifest.parameters() = {{"frames", a.frames}, {"seed", cfg.seed}, {"dark", a.dark}, {"no_stray", a.no_stray}};
  manifest.set_config(experiment_json(cfg));
  for (const auto& w : sim.warnings()) warn(manifest, w);

  fs::create_directories(a.out);
  const auto& g = cfg.geometry;
  SpdfWriter writer(a.out / "frames.spdf", g.width(), g.height(), cfg.scene.bit_depth);
  std::uint64_t fired = 0;
  const LossCounters loss = generate_stream(
      sim, a.frames,
      [&](const FrameBuffer& frame) {
        writer.write(frame);
        fired += frame.count_nonzero();
        return true;
      },
      StreamOptions{std::max(1u, a.workers), 4096, 0});
  writer.close();
  manifest.add_output(a.out, "frames.spdf");

  const auto expected = expected_occupancy(cfg.scene, g);
  double expected_mean = 0.0;
  for (const double v : expected) expected_mean += v;
  expected_mean /= static_cast<double>(expected.size());
  const double measured =
      a.frames == 0 ? 0.0 : static_cast<double>(fired) / (static_cast<double>(a.frames) * static_cast<double>(g.pixel_count()));

  manifest.results() = {{"frames", a.frames},
                        {"bit_depth", cfg.scene.bit_depth},
                        {"mean_occupancy", measured},
                        {"expected_mean_occupancy", expected_mean},
                        {"hot_pixels", sim.hot_pixels().size()},
                        {"pairs", loss.pairs},
                        {"off_sensor", loss.off_sensor},
                        {"absorbed", loss.absorbed},
                        {"undetected", loss.undetected},
                        {"detected", loss.detected},
                        {"genuine_coincidences", loss.genuine_coincidences}};
  manifest.write(a.out);

  std::cout << "wrote " << a.frames << " frames (" << g.width() << "x" << g.height() << ", " << cfg.scene.bit_depth
            << "-bit) to " << (a.out / "frames.spdf").string() << '\n';
  if (a.frames > 0) {
    std::cout << "mean occupancy " << measured << " per pixel per frame (expected " << expected_mean
              << " before crosstalk and hot pixels)\n";
  }
  return 0;
}

int run_calibrate(const CalibrateArgs& a, const std::vector<std::string>& argv) {
  SpdfReader reader(a.input);
  const auto& h = reader.header();
  if (h.bit_depth != 8) throw ConfigError("hot pixel calibration needs 8-bit dark frames, " + a.input.string() + " is 1-bit");
  HotPixelCalibrator calibrator(h.width, h.height, a.threshold);
  FrameBuffer frame = reader.make_frame();
  while (reader.next(frame)) calibrator.add(frame);
  const HotPixelMap map = calibrator.result();

  Manifest manifest("calibrate", argv);
  manifest.inputs()["dark_frames"] = a.input.string();
  manifest.parameters() = {{"threshold", a.threshold}};
  if (map.calibration_frames == 0) warn(manifest, "no dark frames; the hot pixel map is empty");

  fs::create_directories(a.out);
  save_hot_pixel_map(a.out / "hotmap.json", map);
  manifest.add_output(a.out, "hotmap.json");
  manifest.results() = {{"calibration_frames", map.calibration_frames},
                        {"hot_pixels", map.pixels.size()},
                        {"flagged_fraction", map.flagged_fraction()}};
  manifest.write(a.out);
  std::cout << "flagged " << map.pixels.size() << " hot pixels (" << 100.0 * map.flagged_fraction() << "%) from "
            << map.calibration_frames << " dark frames\n";
  return 0;
}

int run_reconstruct(const ReconstructArgs& a, const std::vector<std::string>& argv) {
  FrameFileHeader header;
  {
    const SpdfReader probe(a.input);
    header = probe.header();
  }
  ReconstructOptions opts;
  opts.geometry = geometry_for(header.width, header.height, a.roi);
  opts.accumulator.mode = parse_mode(a.mode);
  if (!(a.memory_mb > 0.0)) throw ConfigError("--memory-mb must be positive");
  opts.accumulator.memory_budget_bytes = static_cast<std::size_t>(a.memory_mb * 1024.0 * 1024.0);
  auto& plan = opts.accumulator.plan;
  for (const auto& s : a.colpairs) plan.column_pairs.push_back(parse_pair(s, "--colpair"));
  for (const auto& s : a.rowpairs) plan.row_pairs.push_back(parse_pair(s, "--rowpair"));
  for (const auto& s : a.refs) {
    const auto [x, y] = parse_pair(s, "--ref");
    plan.references.push_back({x, y});
  }
  opts.workers = std::max(1u, a.workers);
  opts.chunk_frames = a.chunk;
  opts.checkpoints = parse_counts(a.checkpoints, "--checkpoints");
  opts.max_frames = a.max_frames;

  Manifest manifest("reconstruct", argv);
  manifest.inputs()["frames"] = a.input.string();
  if (a.hotmap) {
    opts.hot_pixels = load_hot_pixel_map(*a.hotmap);
    manifest.inputs()["hotmap"] = a.hotmap->string();
  }
  manifest.parameters() = {{"mode", mode_name(opts.accumulator.mode)},
                           {"geometry", geometry_json(*opts.geometry)},
                           {"plan", plan_json(plan)},
                           {"checkpoints", opts.checkpoints},
                           {"max_frames", a.max_frames ? ordered_json(*a.max_frames) : ordered_json(nullptr)},
                           {"memory_budget_bytes", opts.accumulator.memory_budget_bytes}};

  const std::uint64_t available = std::min(header.frame_count, a.max_frames.value_or(header.frame_count));
  for (const auto c : opts.checkpoints) {
    if (c == 0 || c > available) warn(manifest, "checkpoint " + std::to_string(c) + " is outside the stream and is skipped");
  }

  fs::create_directories(a.out);
  JpdAccumulator acc = [&] {
    try {
      return reconstruct_file(a.input, opts, [&](std::uint64_t frames, const JpdAccumulator& prefix) {
        const std::string name = "snapshot_M" + std::to_string(frames) + ".spja";
        prefix.save(a.out / name);
        manifest.add_output(a.out, name);
        std::cout << "checkpoint at " << frames << " frames -> " << name << '\n';
      });
    } catch (const ResourceError& e) {
      throw ResourceError(std::string(e.what()) + " (--mode projection, or raise --memory-mb)");
    }
  }();

  acc.save(a.out / "snapshot.spja");
  manifest.add_output(a.out, "snapshot.spja");
  if (!acc.empty()) write_image(a.out, "intensity", intensity_image(acc), manifest);
  else warn(manifest, "input holds no frames; wrote an empty snapshot");
  manifest.results() = accumulator_json(acc);
  manifest.write(a.out);
  std::cout << "accumulated " << acc.frames() << " frames over a " << acc.geometry().roi().width << "x"
            << acc.geometry().roi().height << " ROI (" << mode_name(acc.mode()) << " mode)\n";
  return 0;
}

int run_project(const ProjectArgs& a, const std::vector<std::string>& argv) {
  const JpdAccumulator acc = JpdAccumulator::load(a.snapshot);
  Manifest manifest("project", argv);
  manifest.inputs()["snapshot"] = a.snapshot.string();
  manifest.inputs()["accumulator"] = accumulator_json(acc);
  manifest.parameters() = {{"kind", a.kind}};
  fs::create_directories(a.out);

  const auto need = [&](const std::optional<int>& v, const char* flag) {
    if (!v) throw ConfigError("--kind " + a.kind + " needs " + flag);
    return *v;
  };

  const std::string kind = boost::to_lower_copy(a.kind);
  if (kind == "gamma" || kind == "gamma-log") {
    const DenseJpd jpd = kind == "gamma" ? gamma(acc) : gamma_log(acc);
    const std::string name = kind == "gamma" ? "gamma.spjg" : "gamma_log.spjg";
    write_gamma_tensor(a.out / name, jpd);
    manifest.add_output(a.out, name);
    manifest.results() = {{"roi_pixels", jpd.size()}, {"frames", jpd.frames}};
    manifest.write(a.out);
    std::cout << "wrote " << jpd.size() << "x" << jpd.size() << " tensor to " << (a.out / name).string() << '\n';
    return 0;
  }

  ProjectionImage image;
  std::string stem;
  if (kind == "conditional") {
    if (a.ref.empty()) throw ConfigError("--kind conditional needs --ref x,y");
    const auto [x, y] = parse_pair(a.ref, "--ref");
    image = conditional_image(acc, {x, y}, ConditionalOptions{a.normalize, !a.no_mask});
    stem = "conditional_" + coord_tag(x, y);
    manifest.parameters()["ref"] = {x, y};
    manifest.parameters()["normalize"] = a.normalize;
    manifest.parameters()["mask_crosstalk"] = !a.no_mask;
  } else if (kind == "antidiag") {
    image = antidiagonal_image(acc, !a.keep_origin);
    stem = "antidiag";
    manifest.parameters()["mask_origin"] = !a.keep_origin;
  } else if (kind == "sum") {
    image = sum_projection(acc);
    stem = "sum";
  } else if (kind == "minus") {
    image = minus_projection(acc);
    stem = "minus";
  } else if (kind == "colpair") {
    const int x1 = need(a.x1, "--x1");
    const int x2 = need(a.x2, "--x2");
    image = column_pair_projection(acc, x1, x2);
    stem = "colpair_" + coord_tag(x1, x2);
    manifest.parameters()["x1"] = x1;
    manifest.parameters()["x2"] = x2;
  } else if (kind == "rowpair") {
    const int y1 = need(a.y1, "--y1");
    const int y2 = need(a.y2, "--y2");
    image = row_pair_projection(acc, y1, y2);
    stem = "rowpair_" + coord_tag(y1, y2);
    manifest.parameters()["y1"] = y1;
    manifest.parameters()["y2"] = y2;
  } else if (kind == "intensity") {
    image = intensity_image(acc);
    stem = "intensity";
  } else {
    throw ConfigError("unknown --kind '" + a.kind +
                      "' (conditional, antidiag, sum, minus, colpair, rowpair, intensity, gamma, gamma-log)");
  }

  write_image(a.out, stem, image, manifest);
  ordered_json results = {{"kind", to_string(image.kind)},
                          {"width", image.width},
                          {"height", image.height},
                          {"x_min", image.x_min},
                          {"y_min", image.y_min},
                          {"frames", image.frames},
                          {"sum", image.sum()}};
  if (image.zero_marginal) warn(manifest, "normalisation requested but the marginal is not positive");
  if (!image.values.empty()) {
    const auto it = std::max_element(image.values.begin(), image.values.end());
    const auto k = static_cast<std::size_t>(it - image.values.begin());
    const int px = image.x_min + static_cast<int>(k % static_cast<std::size_t>(image.width));
    const int py = image.y_min + static_cast<int>(k / static_cast<std::size_t>(image.width));
    results["peak"] = {{"x", px}, {"y", py}, {"value", *it}};
    std::cout << stem << ": " << image.width << "x" << image.height << ", peak " << *it << " at (" << px << ","
              << py << ")\n";
  }
  if (a.fit_width) {
    const CorrelationWidth w = estimate_correlation_width(image);
    results["width"] = {{"sigma", w.sigma}, {"sigma_x", w.sigma_x}, {"sigma_y", w.sigma_y},
                        {"x0", w.x0},       {"y0", w.y0},           {"background", w.background}};
    std::cout << "correlation width sigma = " << w.sigma << " px (sigma_x " << w.sigma_x << ", sigma_y " << w.sigma_y
              << ")\n";
  }
  manifest.results() = results;
  manifest.write(a.out);
  return 0;
}

int run_snr(const SnrArgs& a, const std::vector<std::string>& argv) {
  Manifest manifest("snr", argv);
  std::optional<ExperimentConfig> cfg;
  if (a.config) {
    cfg = load_experiment(*a.config);
    manifest.inputs()["config"] = a.config->string();
    manifest.set_config(experiment_json(*cfg));
  }

  // (frames, anti-diagonal image) per sweep point.
  std::vector<std::pair<std::uint64_t, ProjectionImage>> points;
  std::optional<SensorGeometry> geometry;
  const auto check_geometry = [&](const SensorGeometry& g, const std::string& source) {
    if (!geometry) geometry = g;
    else if (!(*geometry == g)) throw ConfigError(source + " has a different geometry from the other inputs");
  };

  if (a.input && !a.snapshots.empty()) throw ConfigError("use either --in with --sweep or --snapshot, not both");
  if (!a.input && a.snapshots.empty()) {
    if (!cfg) throw ConfigError("snr needs --snapshot, --in with --sweep, or --config for a prediction");
    return predict_only(*cfg, a, manifest);
  }
  if (a.input) {
    const auto sweep = parse_counts(a.sweep, "--sweep");
    if (sweep.empty()) throw ConfigError("--in needs --sweep with at least one frame count");
    FrameFileHeader header;
    {
      const SpdfReader probe(*a.input);
      header = probe.header();
    }
    ReconstructOptions opts;
    opts.geometry = geometry_for(header.width, header.height, a.roi);
    opts.workers = std::max(1u, a.workers);
    opts.chunk_frames = a.chunk;
    opts.checkpoints = sweep;
    opts.max_frames = *std::max_element(sweep.begin(), sweep.end());
    if (a.hotmap) {
      opts.hot_pixels = load_hot_pixel_map(*a.hotmap);
      manifest.inputs()["hotmap"] = a.hotmap->string();
    }
    manifest.inputs()["frames"] = a.input->string();
    for (const auto m : sweep) {
      if (m == 0 || m > header.frame_count) {
        throw ConfigError("sweep point " + std::to_string(m) + " is outside the stream of " +
                          std::to_string(header.frame_count) + " frames");
      }
    }
    static_cast<void>(reconstruct_file(*a.input, opts, [&](std::uint64_t frames, const JpdAccumulator& prefix) {
      points.emplace_back(frames, antidiagonal_image(prefix));
    }));
    check_geometry(*opts.geometry, a.input->string());
  } else {
    if (a.snapshots.empty()) throw ConfigError("snr needs --snapshot or --in with --sweep");
    if (!a.sweep.empty()) throw ConfigError("--sweep takes prefixes of --in; pass several --snapshot files instead");
    manifest.inputs()["snapshots"] = ordered_json::array();
    for (const auto& path : a.snapshots) {
      const JpdAccumulator acc = JpdAccumulator::load(path);
      check_geometry(acc.geometry(), path.string());
      manifest.inputs()["snapshots"].push_back(path.string());
      points.emplace_back(acc.frames(), antidiagonal_image(acc));
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  RegionMasks masks;
  const std::string style = boost::to_lower_copy(a.masks);
  if (!a.signal.empty() || !a.noise.empty() || style == "rect") {
    if (a.signal.empty() || a.noise.empty()) throw ConfigError("rect masks need both --signal and --noise");
    masks = rect_masks(*geometry, parse_rects(a.signal), parse_rects(a.noise));
  } else {
    if (!cfg) throw ConfigError("masks '" + a.masks + "' need --config (or give --signal and --noise rectangles)");
    if (!(cfg->geometry == *geometry)) {
      throw ConfigError("the config's sensor geometry differs from the snapshot; check [sensor] and --roi");
    }
    if (style == "config") masks = experiment_masks(*cfg);
    else if (style == "default") masks = default_masks(cfg->scene, cfg->geometry);
    else if (style == "split") masks = split_masks(cfg->scene, cfg->geometry);
    else throw ConfigError("--masks must be config, default, split or rect, got '" + a.masks + "'");
  }
  validate_masks(masks, *geometry);
  manifest.parameters() = {{"masks", masks.description},
                           {"signal_pixels", masks.signal.size()},
                           {"noise_pixels", masks.noise.size()}};

  std::optional<SnrParameters> params;
  if (cfg) params = snr_parameters(cfg->scene, cfg->geometry);

  std::vector<SweepRow> rows;
  std::vector<ScalingPoint> scaling;
  ordered_json measured = ordered_json::array();
  SnrMeasurement last;
  for (const auto& [frames, image] : points) {
    last = measure_snr(image, masks);
    const double m = static_cast<double>(frames);
    const double predicted = params ? predict_snr(*params, m) : 0.0;
    rows.push_back({m, last.snr, last.snr_err, predicted});
    if (!last.infinite) scaling.push_back({m, last.snr, last.snr_err});
    auto j = measurement_json(last);
    if (params) j["predicted"] = predicted;
    measured.push_back(j);
    std::cout << "M=" << frames << "  SNR " << last.snr << " +/- " << last.snr_err;
    if (params) std::cout << "  (predicted " << predicted << ")";
    std::cout << '\n';
  }

  SnrReport report;
  report.measured = last;
  report.frames = static_cast<double>(last.frames);
  report.masks = masks.description;
  if (params) {
    report.parameters = *params;
    report.predicted_snr = predict_snr(*params, report.frames);
    report.ideal_snr = predict_ideal_snr(*params, report.frames);
    report.n_genuine = genuine_per_frame(*params);
    report.n_accidental = accidental_per_frame(*params);
    report.a_ideal = ideal_coefficient(*params);
  }
  fs::create_directories(a.out);
  ordered_json results = {{"points", measured}};
  if (points.size() >= 3) {
    report.fit = fit_sqrt_scaling(scaling);
    const auto& f = *report.fit;
    results["fit"] = {{"a", f.a},           {"a_err", f.a_err},       {"r2", f.r2},
                      {"exponent", f.exponent}, {"exponent_err", f.exponent_err}, {"prefactor", f.prefactor}};
    std::cout << "fit SNR = a sqrt(M): a = " << f.a << " +/- " << f.a_err << ", r2 = " << f.r2
              << "; free exponent " << f.exponent << " +/- " << f.exponent_err << '\n';
  } else if (points.size() > 1) {
    warn(manifest, "fewer than 3 sweep points; no sqrt(M) fit");
  }
  if (points.size() > 1) {
    write_sweep_csv(a.out / "sweep.csv", rows);
    manifest.add_output(a.out, "sweep.csv");
  }
  if (params) {
    const double a_pred = predict_snr(*params, 1.0);
    results["a_ideal"] = report.a_ideal;
    results["a_predicted"] = a_pred;
    print_coefficients(*params);
  }
  write_snr_report(a.out / "snr.json", report);
  manifest.add_output(a.out, "snr.json");
  manifest.results() = results;
  manifest.write(a.out);
  return 0;
}

}  // namespace spadcorr::cli
