#include "egotraj/driftsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "egotraj/errors.hpp"
#include "egotraj/metrics.hpp"
#include "egotraj/rng.hpp"

namespace egotraj {

namespace {

// Seconds of walking per spline control point.
constexpr double kSecondsPerControlPoint = 5.0;

struct Spline {
  std::vector<Vec3> points;
  bool closed = false;

  std::size_t segments() const { return closed ? points.size() : points.size() - 1; }

  const Vec3& at(std::int64_t i) const {
    const auto n = static_cast<std::int64_t>(points.size());
    if (closed) return points[static_cast<std::size_t>(((i % n) + n) % n)];
    return points[static_cast<std::size_t>(std::clamp<std::int64_t>(i, 0, n - 1))];
  }

  // Phantom end points mirror the neighbor so open ends keep a tangent.
  Vec3 control(std::int64_t i) const {
    const auto n = static_cast<std::int64_t>(points.size());
    if (!closed && i < 0) return 2.0 * points.front() - points[1];
    if (!closed && i >= n) return 2.0 * points.back() - points[points.size() - 2];
    return at(i);
  }

  // Position and derivative at global parameter u in [0, segments()].
  std::pair<Vec3, Vec3> eval(double u) const {
    auto seg = static_cast<std::int64_t>(std::floor(u));
    seg = std::clamp<std::int64_t>(seg, 0, static_cast<std::int64_t>(segments()) - 1);
    const double s = u - static_cast<double>(seg);
    const Vec3 p0 = control(seg - 1);
    const Vec3 p1 = control(seg);
    const Vec3 p2 = control(seg + 1);
    const Vec3 p3 = control(seg + 2);
    const Vec3 c1 = -p0 + p2;
    const Vec3 c2 = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const Vec3 c3 = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    const Vec3 pos = 0.5 * (2.0 * p1 + s * (c1 + s * (c2 + s * c3)));
    const Vec3 vel = 0.5 * (c1 + s * (2.0 * c2 + 3.0 * s * c3));
    return {pos, vel};
  }
};

Spline make_spline(Rng& rng, PathStyle style, double length, std::size_t count) {
  Spline spline;
  switch (style) {
    case PathStyle::kLoop: {
      spline.closed = true;
      const double radius = length / (2.0 * std::numbers::pi);
      for (std::size_t k = 0; k < count; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
        const double r = radius * (1.0 + 0.15 * rng.uniform(-1.0, 1.0));
        spline.points.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
      }
      break;
    }
    case PathStyle::kCorridor: {
      const double step = length / static_cast<double>(count - 1);
      for (std::size_t k = 0; k < count; ++k) {
        spline.points.emplace_back(step * static_cast<double>(k), 0.3 * rng.uniform(-1.0, 1.0), 0.0);
      }
      break;
    }
    case PathStyle::kRandomWalk: {
      const double step = length / static_cast<double>(count - 1);
      double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
      Vec3 p = Vec3::Zero();
      for (std::size_t k = 0; k < count; ++k) {
        spline.points.push_back(p);
        heading += rng.normal(0.0, 0.6);
        p += step * Vec3(std::cos(heading), std::sin(heading), 0.0);
      }
      break;
    }
  }
  return spline;
}

void check_stats(const InlierStatsRange& r, const char* name) {
  if (r.count_min < 0 || r.count_min > r.count_max || !(r.ratio_min >= 0.0) || r.ratio_min > r.ratio_max ||
      !(r.ratio_max <= 1.0)) {
    throw InvalidArgumentError("driftsim", std::string(name) + " inlier statistics range is invalid");
  }
}

Vec3 gaussian3(Rng& rng, double sigma) {
  const double x = rng.normal(0.0, sigma);
  const double y = rng.normal(0.0, sigma);
  const double z = rng.normal(0.0, sigma);
  return {x, y, z};
}

}  // namespace

std::string to_string(PathStyle style) {
  switch (style) {
    case PathStyle::kLoop:
      return "loop";
    case PathStyle::kCorridor:
      return "corridor";
    case PathStyle::kRandomWalk:
      return "random-walk";
  }
  return "loop";
}

PathStyle parse_path_style(std::string_view text) {
  if (text == "loop") return PathStyle::kLoop;
  if (text == "corridor") return PathStyle::kCorridor;
  if (text == "random-walk") return PathStyle::kRandomWalk;
  throw InvalidArgumentError("driftsim", "unknown path style '" + std::string(text) +
                                             "' (expected loop|corridor|random-walk)");
}

Trajectory generate_gt_trajectory(std::uint64_t seed, std::int64_t n_frames, double fps, const PathConfig& path) {
  if (n_frames < 2) {
    throw InvalidArgumentError("driftsim", "n_frames must be at least 2");
  }
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw InvalidArgumentError("driftsim", "fps must be positive");
  }
  if (!(path.speed > 0.0) || !std::isfinite(path.camera_height) || !(path.max_pitch >= 0.0) ||
      !(path.max_pitch < std::numbers::pi / 2.0)) {
    throw InvalidArgumentError("driftsim", "path config out of range");
  }
  Rng rng(seed);
  const double duration = static_cast<double>(n_frames - 1) / fps;
  const auto count = static_cast<std::size_t>(std::max(4.0, std::ceil(duration / kSecondsPerControlPoint)));
  const Spline spline = make_spline(rng, path.style, path.speed * duration, count);

  const double pitch_amp = rng.uniform(0.3, 1.0) * path.max_pitch;
  const double pitch_freq = rng.uniform(0.1, 0.3);
  const double pitch_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double bob_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Trajectory traj(fps);
  double yaw = 0.0;
  const double u_scale = static_cast<double>(spline.segments()) / static_cast<double>(n_frames - 1);
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const double time = static_cast<double>(t) / fps;
    auto [pos, vel] = spline.eval(static_cast<double>(t) * u_scale);
    if (vel.head<2>().norm() > 1e-12) {
      yaw = std::atan2(vel.y(), vel.x());
    }
    pos.z() = path.camera_height + 0.02 * std::sin(2.0 * std::numbers::pi * 0.3 * time + bob_phase);
    const double pitch = pitch_amp * std::sin(2.0 * std::numbers::pi * pitch_freq * time + pitch_phase);
    const Rotation r = so3_exp(Vec3(0.0, 0.0, yaw)) * so3_exp(Vec3(0.0, -pitch, 0.0));
    traj.push_back(t, {r, pos});
  }
  return traj;
}

void validate(const DriftConfig& c) {
  if (!(std::abs(c.scale_drift_per_frame) < 0.1)) {
    throw InvalidArgumentError("driftsim", "|scale_drift_per_frame| must be below 0.1");
  }
  if (!(c.rot_noise_sigma >= 0.0) || !(c.trans_noise_sigma >= 0.0) || !std::isfinite(c.rot_noise_sigma) ||
      !std::isfinite(c.trans_noise_sigma)) {
    throw InvalidArgumentError("driftsim", "noise sigmas must be finite and non-negative");
  }
}

Trajectory corrupt_to_slam(const Trajectory& gt, const DriftConfig& config) {
  validate(config);
  Trajectory out(gt.fps());
  if (gt.empty()) return out;
  Rng rng(config.rng_seed);
  SimTransform q;
  out.push_back(gt[0].frame, RigidPose{});
  for (std::size_t i = 1; i < gt.size(); ++i) {
    const RigidPose delta = gt[i - 1].pose.inverse() * gt[i].pose;
    const Vec3 rot = gaussian3(rng, config.rot_noise_sigma);
    const Vec3 trans = gaussian3(rng, config.trans_noise_sigma);
    const SimTransform noise(so3_exp(rot), trans, 1.0 + config.scale_drift_per_frame);
    q = compose(compose(q, embed_rigid(delta)), noise);
    out.push_back(gt[i].frame, project_rigid(q, {.force = true}));
  }
  return out;
}

void validate(const AnchorNoiseConfig& c) {
  if (!(c.pose_trans_sigma >= 0.0) || !(c.pose_rot_sigma >= 0.0) || !std::isfinite(c.pose_trans_sigma) ||
      !std::isfinite(c.pose_rot_sigma)) {
    throw InvalidArgumentError("driftsim", "anchor noise sigmas must be finite and non-negative");
  }
  if (c.anchor_period < 1) {
    throw InvalidArgumentError("driftsim", "anchor period must be at least 1 frame");
  }
  if (!(c.outlier_fraction >= 0.0 && c.outlier_fraction <= 1.0)) {
    throw InvalidArgumentError("driftsim", "outlier fraction must lie in [0, 1]");
  }
  if (!(c.outlier_trans_range >= 0.0) || !std::isfinite(c.outlier_trans_range)) {
    throw InvalidArgumentError("driftsim", "outlier translation range must be non-negative");
  }
  check_stats(c.good_stats, "good");
  check_stats(c.bad_stats, "bad");
}

SyntheticCandidates synthesize_anchor_candidates(const Trajectory& gt, const AnchorNoiseConfig& config) {
  validate(config);
  SyntheticCandidates out;
  for (std::size_t i = 0; i < gt.size(); i += static_cast<std::size_t>(config.anchor_period)) {
    const auto& f = gt[i];
    Rng rng(derive_seed(config.rng_seed, static_cast<std::uint64_t>(f.frame)));
    const bool outlier = rng.uniform() < config.outlier_fraction;
    AnchorCandidate c;
    c.frame = f.frame;
    const InlierStatsRange* stats = &config.good_stats;
    if (outlier) {
      Vec3 dir = gaussian3(rng, 1.0);
      const double n = dir.norm();
      dir = n > 0.0 ? Vec3(dir / n) : Vec3::UnitX();
      const double magnitude = rng.uniform(0.0, config.outlier_trans_range);
      const double qw = rng.normal();
      const double qx = rng.normal();
      const double qy = rng.normal();
      const double qz = rng.normal();
      c.pose = {Rotation(qw, qx, qy, qz), f.pose.translation + magnitude * dir};
      stats = &config.bad_stats;
    } else {
      const Vec3 dt = gaussian3(rng, config.pose_trans_sigma);
      const Vec3 dr = gaussian3(rng, config.pose_rot_sigma);
      c.pose = {so3_exp(dr) * f.pose.rotation, f.pose.translation + dt};
    }
    c.inlier_count = rng.integer(stats->count_min, stats->count_max);
    c.inlier_ratio = rng.uniform(stats->ratio_min, stats->ratio_max);
    out.candidates.push_back(c);
    out.is_outlier.push_back(outlier);
  }
  return out;
}

double translation_rmse(const Trajectory& pred, const Trajectory& gt) {
  const FrameSeries err = translation_error(pred, gt);
  std::vector<double> sq(err.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double m = err.values[i] / 1000.0;
    sq[i] = m * m;
  }
  return std::sqrt(pairwise_mean(sq));
}

ScenarioInputs make_scenario_inputs(std::uint64_t seed, const ScenarioConfig& config) {
  ScenarioInputs in;
  in.gt = generate_gt_trajectory(derive_seed(seed, 1), config.frames, config.fps, config.path);

  DriftConfig drift = config.drift;
  drift.rng_seed = derive_seed(seed, 2);
  in.slam = corrupt_to_slam(in.gt, drift);

  AnchorNoiseConfig noise = config.anchors;
  noise.rng_seed = derive_seed(seed, 3);
  in.candidates = synthesize_anchor_candidates(in.gt, noise);
  return in;
}

ScenarioBundle end_to_end_scenario(std::uint64_t seed, const ScenarioConfig& config) {
  ScenarioInputs in = make_scenario_inputs(seed, config);
  ScenarioBundle b;
  b.gt = std::move(in.gt);
  b.slam = std::move(in.slam);
  b.candidates = std::move(in.candidates);

  b.anchors = filter_anchors(b.candidates.candidates, config.filter);
  if (b.anchors.empty()) {
    throw NoAnchorError("driftsim", "scenario produced no reliable anchors");
  }
  b.unrefined = align_at_anchor(b.anchors.front(), b.slam);
  b.refined = refine_trajectory(b.anchors, b.slam, config.refine);

  b.unrefined_final_error = (b.unrefined[b.unrefined.size() - 1].pose.translation -
                             b.gt[b.gt.size() - 1].pose.translation)
                                .norm();
  b.unrefined_rmse = translation_rmse(b.unrefined, b.gt);
  b.refined_rmse = translation_rmse(b.refined, b.gt);
  b.improvement_ratio = b.refined_rmse > 0.0 ? b.unrefined_rmse / b.refined_rmse
                                           : std::numeric_limits<double>::infinity();
  return b;
}

}  // namespace egotraj
