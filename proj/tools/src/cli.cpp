#include "egotraj_cli/cli.hpp"

#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <typeinfo>
#include <vector>

#include <CLI11.hpp>

#include "egotraj/driftsim.hpp"
#include "egotraj/errors.hpp"
#include "egotraj/metrics.hpp"
#include "egotraj/refine.hpp"
#include "egotraj/synthdb.hpp"
#include "egotraj/trajio.hpp"
#include "egotraj_cli/config.hpp"

namespace egotraj::cli {

namespace fs = std::filesystem;

namespace {

void log(const std::string& command, const std::string& message) {
  std::cerr << "egotraj " << command << ": " << message << '\n';
}

fs::path output_dir(const fs::path& file) {
  const fs::path dir = file.parent_path();
  return dir.empty() ? fs::path(".") : dir;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cli", "cannot create directory " + dir.string() + ": " + ec.message());
  }
}

void prepare_output(const fs::path& file) { ensure_dir(output_dir(file)); }

std::string hint_for(const Error& e) {
  if (dynamic_cast<const NoAnchorError*>(&e)) {
    return "lower --min-inlier-count / --min-inlier-ratio or supply more localization candidates";
  }
  if (dynamic_cast<const GapError*>(&e)) {
    return "the SLAM trajectory needs consecutive frames covering every anchor frame";
  }
  if (dynamic_cast<const ParseError*>(&e)) {
    return "fix the input file at the reported line; formats are described in README.md";
  }
  if (dynamic_cast<const IoError*>(&e)) {
    return "check that the path exists and is readable/writable";
  }
  if (dynamic_cast<const DegenerateError*>(&e)) {
    return "the input geometry is degenerate (static segment, coincident or collinear points)";
  }
  if (dynamic_cast<const DomainError*>(&e)) {
    return "rerun with --cut-locus split to split intervals whose residual is close to a half turn";
  }
  if (dynamic_cast<const InvariantError*>(&e)) {
    return "the input violates a format invariant; regenerate or repair the file";
  }
  if (dynamic_cast<const PreconditionError*>(&e)) {
    return "inputs must be sorted by strictly increasing frame index";
  }
  return "check the flag values (see --help)";
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each writes its outputs plus effective_config.json next
// to them, so a chained pipeline reproduces manual runs byte for byte.

void do_sample_db(const PipelineConfig& cfg, const fs::path& cloud_path, const fs::path& out, std::size_t threads) {
  const PointCloud cloud = read_pointcloud_ply(cloud_path);
  const KdTree index = build_index(cloud);
  GridSamplerConfig grid = cfg.grid;
  grid.rng_seed = *cfg.seed;
  const auto entries = sample_camera_grid(cloud, index, grid, threads);
  prepare_output(out);
  export_database_poses(entries, out);
  write_effective_config(cfg, output_dir(out));
  log("sample-db", "wrote " + std::to_string(entries.size()) + " database poses to " + out.string());
}

void do_filter(const PipelineConfig& cfg, const fs::path& candidates_path, const fs::path& out) {
  const auto candidates = read_anchor_candidates(candidates_path);
  const AnchorSet anchors = filter_anchors(candidates, cfg.filter);
  prepare_output(out);
  write_anchor_candidates(anchors, out);
  write_effective_config(cfg, output_dir(out));
  std::string msg = "kept " + std::to_string(anchors.size()) + " of " + std::to_string(candidates.size()) +
                    " candidates";
  if (!candidates.empty()) {
    const auto cov = anchor_coverage_report(anchors, candidates.back().frame + 1);
    msg += "; largest gap " + std::to_string(cov.largest_gap) + " frames";
  }
  log("filter-anchors", msg);
}

void do_refine(const PipelineConfig& cfg, const fs::path& anchors_path, const fs::path& slam_path,
               const fs::path& out, std::size_t threads) {
  const AnchorSet anchors = filter_anchors(read_anchor_candidates(anchors_path), cfg.filter);
  if (anchors.empty()) {
    throw NoAnchorError("refine", "no reliable anchors survive filtering of " + anchors_path.string());
  }
  const Trajectory slam = read_trajectory(slam_path);
  const Trajectory refined = refine_trajectory(anchors, slam, cfg.refine, threads);
  prepare_output(out);
  write_trajectory(refined, out);
  write_effective_config(cfg, output_dir(out));
  log("refine", "refined " + std::to_string(refined.size()) + " poses against " + std::to_string(anchors.size()) +
                    " anchors -> " + out.string());
}

void do_canonicalize(const PipelineConfig& cfg, const fs::path& in, const fs::path& out,
                     const std::optional<fs::path>& transform_path) {
  const CanonicalizedTrajectory c = canonicalize(read_trajectory(in));
  prepare_output(out);
  write_trajectory(c.trajectory, out);
  if (transform_path) {
    prepare_output(*transform_path);
    write_canonicalization_transform(c.transform, *transform_path);
  }
  write_effective_config(cfg, output_dir(out));
  log("canonicalize", "canonicalized " + std::to_string(c.trajectory.size()) + " poses (yaw " +
                          format_double(c.transform.yaw()) + " rad) -> " + out.string());
}

void do_evaluate(const PipelineConfig& cfg, const fs::path& pred_path, const fs::path& gt_path,
                 const std::optional<fs::path>& pred_motion_path, const std::optional<fs::path>& gt_motion_path,
                 const fs::path& out, std::size_t threads) {
  const Trajectory pred = read_trajectory(pred_path);
  const Trajectory gt = read_trajectory(gt_path);
  std::optional<MotionSequence> pred_motion;
  std::optional<MotionSequence> gt_motion;
  if (pred_motion_path) pred_motion = read_motion(*pred_motion_path);
  if (gt_motion_path) gt_motion = read_motion(*gt_motion_path);
  const MetricsReport report = evaluate_all(pred, gt, pred_motion ? &*pred_motion : nullptr,
                                            gt_motion ? &*gt_motion : nullptr, cfg.metrics, threads);
  prepare_output(out);
  write_metrics_report(report, out);
  write_effective_config(cfg, output_dir(out));
  log("evaluate", "T_neck " + format_double(report.t_neck_mm.mean) + " mm -> " + out.string());
}

void do_simulate(const PipelineConfig& cfg, const fs::path& out_dir) {
  ScenarioConfig sc;
  sc.frames = cfg.simulation.frames;
  sc.fps = cfg.simulation.fps;
  sc.path = cfg.simulation.path;
  sc.drift = cfg.simulation.drift;
  sc.anchors = cfg.simulation.anchors;
  const ScenarioInputs in = make_scenario_inputs(*cfg.seed, sc);
  ensure_dir(out_dir);
  write_trajectory(in.gt, out_dir / "gt.csv");
  write_trajectory(in.slam, out_dir / "slam.csv");
  write_anchor_candidates(in.candidates.candidates, out_dir / "candidates.csv");
  write_effective_config(cfg, out_dir);
  log("simulate", "wrote gt.csv, slam.csv and candidates.csv (" + std::to_string(in.gt.size()) + " frames, " +
                      std::to_string(in.candidates.candidates.size()) + " candidates) to " + out_dir.string());
}

// ---------------------------------------------------------------------------
// Flag registration. Every config-backed flag is bound to a scratch value and
// copied into the effective config only when given on the command line.

class Settings {
 public:
  template <typename Get>
  CLI::Option* add(CLI::App* app, const std::string& flag, Get get, const std::string& help) {
    using T = std::decay_t<decltype(get(std::declval<PipelineConfig&>()))>;
    auto value = std::make_shared<T>(get(defaults_));
    CLI::Option* opt = app->add_option(flag, *value, help)->capture_default_str();
    overrides_.push_back([opt, value, get](PipelineConfig& c) {
      if (opt->count() > 0) get(c) = *value;
    });
    return opt;
  }

  CLI::Option* add_text(CLI::App* app, const std::string& flag, const std::string& default_text,
                        std::function<void(PipelineConfig&, const std::string&)> set, const std::string& help) {
    auto value = std::make_shared<std::string>(default_text);
    CLI::Option* opt = app->add_option(flag, *value, help)->capture_default_str();
    overrides_.push_back([opt, value, set](PipelineConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
    return opt;
  }

  CLI::Option* add_switch(CLI::App* app, const std::string& flag, std::function<void(PipelineConfig&)> set,
                          const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, help);
    overrides_.push_back([opt, set](PipelineConfig& c) {
      if (opt->count() > 0) set(c);
    });
    return opt;
  }

  CLI::Option* add_seed(CLI::App* app) {
    auto value = std::make_shared<std::uint64_t>(0);
    CLI::Option* opt = app->add_option("--seed", *value, "RNG seed (required here or as 'seed' in --config)");
    overrides_.push_back([opt, value](PipelineConfig& c) {
      if (opt->count() > 0) c.seed = *value;
    });
    return opt;
  }

  void apply(PipelineConfig& c) const {
    for (const auto& f : overrides_) f(c);
  }

  const PipelineConfig& defaults() const { return defaults_; }

 private:
  PipelineConfig defaults_;
  std::vector<std::function<void(PipelineConfig&)>> overrides_;
};

void add_filter_flags(Settings& s, CLI::App* app) {
  s.add(app, "--min-inlier-count", [](auto& c) -> auto& { return c.filter.min_inlier_count; },
        "minimum PnP inlier count of an anchor");
  s.add(app, "--min-inlier-ratio", [](auto& c) -> auto& { return c.filter.min_inlier_ratio; },
        "minimum PnP inlier ratio of an anchor");
  s.add(app, "--min-interval", [](auto& c) -> auto& { return c.filter.min_interval_frames; },
        "minimum frame spacing between anchors");
}

void add_refine_flags(Settings& s, CLI::App* app) {
  s.add_text(
       app, "--scale-mode", to_string(s.defaults().refine.scale_mode),
       [](PipelineConfig& c, const std::string& v) { c.refine.scale_mode = parse_scale_mode(v); },
       "interval scale model")
      ->check(CLI::IsMember({"unit", "ratio", "anchor-distance-ratio"}));
  s.add_text(
       app, "--cut-locus", to_string(s.defaults().refine.cut_locus_policy),
       [](PipelineConfig& c, const std::string& v) { c.refine.cut_locus_policy = parse_cut_locus_policy(v); },
       "handling of residuals near a half turn")
      ->check(CLI::IsMember({"error", "split", "split-interval"}));
}

void add_metric_flags(Settings& s, CLI::App* app) {
  s.add(app, "--ground-z", [](auto& c) -> auto& { return c.metrics.ground_z; }, "floor height for FS/FC, m");
  s.add_switch(
      app, "--estimate-ground", [](PipelineConfig& c) { c.metrics.estimate_ground = true; },
      "estimate the floor as the 5th percentile of ground-truth foot heights");
  s.add(app, "--foot-height", [](auto& c) -> auto& { return c.metrics.foot_height_threshold; },
        "foot sliding height threshold H, m");
}

}  // namespace

std::string version_string() {
  return "egotraj " + std::string(EGOTRAJ_VERSION) + " (csv format_version " + std::to_string(kFormatVersion) +
         ", report format_version " + std::to_string(kFormatVersion) + ")";
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Drift correction of egocentric camera trajectories against map-based localization anchors.",
               "egotraj"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Settings settings;
  std::string config_path;
  std::size_t threads = 1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);
    sub->add_option("--threads", threads, "worker threads; output does not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  // sample-db
  std::string cloud_path;
  std::string db_out;
  auto* sample = app.add_subcommand("sample-db", "sample virtual camera poses over a point cloud");
  sample->add_option("--cloud", cloud_path, "input point cloud (PLY)")->required();
  sample->add_option("--out", db_out, "output database pose CSV")->required();
  settings.add(sample, "--spacing-xy", [](auto& c) -> auto& { return c.grid.spacing_xy; }, "grid spacing in x/y, m");
  settings.add(sample, "--spacing-z", [](auto& c) -> auto& { return c.grid.spacing_z; }, "grid spacing in z, m");
  settings.add(sample, "--z-min", [](auto& c) -> auto& { return c.grid.z_min; }, "lowest camera height, m");
  settings.add(sample, "--z-max", [](auto& c) -> auto& { return c.grid.z_max; }, "highest camera height, m");
  settings.add(sample, "--clearance", [](auto& c) -> auto& { return c.grid.clearance; },
               "minimum distance to the cloud, m");
  settings.add(sample, "--pitch-min", [](auto& c) -> auto& { return c.grid.pitch_min; }, "lowest pitch, rad");
  settings.add(sample, "--pitch-max", [](auto& c) -> auto& { return c.grid.pitch_max; }, "highest pitch, rad");
  settings.add(sample, "--yaws", [](auto& c) -> auto& { return c.grid.yaws_per_position; },
               "headings per grid position");
  settings.add_seed(sample);
  common(sample);

  // filter-anchors
  std::string candidates_path;
  std::string anchors_out;
  auto* filter = app.add_subcommand("filter-anchors", "select reliable anchors from localization candidates");
  filter->add_option("--candidates", candidates_path, "anchor candidate CSV")->required();
  filter->add_option("--out", anchors_out, "output anchor CSV")->required();
  add_filter_flags(settings, filter);
  common(filter);

  // refine
  std::string refine_anchors;
  std::string refine_slam;
  std::string refine_out;
  auto* refine = app.add_subcommand("refine", "distribute anchor residuals over a SLAM trajectory");
  refine->add_option("--anchors", refine_anchors, "anchor CSV (re-filtered with the anchor thresholds)")->required();
  refine->add_option("--slam", refine_slam, "SLAM trajectory CSV")->required();
  refine->add_option("--out", refine_out, "output refined trajectory CSV")->required();
  add_refine_flags(settings, refine);
  add_filter_flags(settings, refine);
  common(refine);

  // canonicalize
  std::string canon_in;
  std::string canon_out;
  std::string canon_transform;
  auto* canon = app.add_subcommand("canonicalize", "move the first frame to the origin facing +x");
  canon->add_option("--in", canon_in, "input trajectory CSV")->required();
  canon->add_option("--out", canon_out, "output canonical trajectory CSV")->required();
  canon->add_option("--emit-transform", canon_transform, "write the world_from_canonical transform (JSON)");
  common(canon);

  // evaluate
  std::string eval_pred;
  std::string eval_gt;
  std::string eval_pred_motion;
  std::string eval_gt_motion;
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "compute trajectory and motion metrics");
  evaluate->add_option("--pred-traj", eval_pred, "predicted trajectory CSV")->required();
  evaluate->add_option("--gt-traj", eval_gt, "ground-truth trajectory CSV")->required();
  auto* pm = evaluate->add_option("--pred-motion", eval_pred_motion, "predicted motion CSV");
  auto* gm = evaluate->add_option("--gt-motion", eval_gt_motion, "ground-truth motion CSV");
  pm->needs(gm);
  gm->needs(pm);
  evaluate->add_option("--out", eval_out, "output report JSON")->required();
  add_metric_flags(settings, evaluate);
  common(evaluate);

  // simulate
  std::string sim_dir;
  auto* simulate = app.add_subcommand("simulate", "generate ground truth, drifting SLAM and anchor candidates");
  settings.add_seed(simulate);
  settings.add(simulate, "--frames", [](auto& c) -> auto& { return c.simulation.frames; }, "number of frames");
  settings.add(simulate, "--fps", [](auto& c) -> auto& { return c.simulation.fps; }, "frame rate");
  settings.add(simulate, "--drift", [](auto& c) -> auto& { return c.simulation.drift.scale_drift_per_frame; },
               "scale drift per frame");
  settings.add(simulate, "--anchor-period", [](auto& c) -> auto& { return c.simulation.anchors.anchor_period; },
               "frames between localization candidates");
  settings.add(simulate, "--outlier-frac", [](auto& c) -> auto& { return c.simulation.anchors.outlier_fraction; },
               "fraction of outlier candidates");
  settings
      .add_text(
          simulate, "--style", to_string(settings.defaults().simulation.path.style),
          [](PipelineConfig& c, const std::string& v) { c.simulation.path.style = parse_path_style(v); },
          "ground-truth path shape")
      ->check(CLI::IsMember({"loop", "corridor", "random-walk"}));
  settings.add(simulate, "--speed", [](auto& c) -> auto& { return c.simulation.path.speed; }, "walking speed, m/s");
  simulate->add_option("--out-dir", sim_dir, "output directory")->required();
  common(simulate);

  // pipeline
  std::string pipe_candidates;
  std::string pipe_slam;
  std::string pipe_gt;
  std::string pipe_pred_motion;
  std::string pipe_gt_motion;
  std::string pipe_dir;
  auto* pipeline =
      app.add_subcommand("pipeline", "filter-anchors -> refine -> canonicalize -> evaluate with one config");
  pipeline->add_option("--candidates", pipe_candidates, "anchor candidate CSV")->required();
  pipeline->add_option("--slam", pipe_slam, "SLAM trajectory CSV")->required();
  pipeline->add_option("--gt-traj", pipe_gt, "ground-truth trajectory CSV")->required();
  auto* ppm = pipeline->add_option("--pred-motion", pipe_pred_motion, "predicted motion CSV");
  auto* pgm = pipeline->add_option("--gt-motion", pipe_gt_motion, "ground-truth motion CSV");
  ppm->needs(pgm);
  pgm->needs(ppm);
  pipeline->add_option("--out-dir", pipe_dir, "output directory")->required();
  add_filter_flags(settings, pipeline);
  add_refine_flags(settings, pipeline);
  add_metric_flags(settings, pipeline);
  common(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  PipelineConfig cfg = settings.defaults();
  try {
    if (!config_path.empty()) load_config_file(config_path, cfg);
    settings.apply(cfg);
    validate(cfg);
    if ((sample->parsed() || simulate->parsed()) && !cfg.seed) {
      throw ConfigError("this subcommand needs --seed or a 'seed' key in --config");
    }
  } catch (const ConfigError& e) {
    std::cerr << "egotraj: usage error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const Error& e) {
    std::cerr << "egotraj: usage error [" << e.module() << "]: " << e.what() << '\n';
    return kExitUsageError;
  }

  auto opt_path = [](const std::string& s) { return s.empty() ? std::optional<fs::path>{} : fs::path(s); };
  try {
    if (sample->parsed()) {
      do_sample_db(cfg, cloud_path, db_out, threads);
    } else if (filter->parsed()) {
      do_filter(cfg, candidates_path, anchors_out);
    } else if (refine->parsed()) {
      do_refine(cfg, refine_anchors, refine_slam, refine_out, threads);
    } else if (canon->parsed()) {
      do_canonicalize(cfg, canon_in, canon_out, opt_path(canon_transform));
    } else if (evaluate->parsed()) {
      do_evaluate(cfg, eval_pred, eval_gt, opt_path(eval_pred_motion), opt_path(eval_gt_motion), eval_out, threads);
    } else if (simulate->parsed()) {
      do_simulate(cfg, sim_dir);
    } else if (pipeline->parsed()) {
      const fs::path dir(pipe_dir);
      ensure_dir(dir);
      do_filter(cfg, pipe_candidates, dir / "anchors.csv");
      do_refine(cfg, dir / "anchors.csv", pipe_slam, dir / "refined.csv", threads);
      do_canonicalize(cfg, dir / "refined.csv", dir / "canonical.csv", dir / "canonical_transform.json");
      do_evaluate(cfg, dir / "refined.csv", pipe_gt, opt_path(pipe_pred_motion), opt_path(pipe_gt_motion),
                  dir / "report.json", threads);
    }
  } catch (const Error& e) {
    std::cerr << "egotraj: error [" << e.module() << "]: " << e.what() << "\n  hint: " << hint_for(e) << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "egotraj: error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("egotraj");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace egotraj::cli
