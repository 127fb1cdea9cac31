#include "egotraj/refine.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "egotraj/errors.hpp"
#include "egotraj/parallel.hpp"

namespace egotraj {

namespace {

constexpr double kMinBaseline = 1e-6;
constexpr double kMinHorizontalForward = 1e-6;

RigidPose apply(const SimTransform& t, const RigidPose& p) {
  return project_rigid(compose(t, embed_rigid(p)), {.force = true});
}

// Everything needed to evaluate one interval [n, m].
struct IntervalModel {
  FrameIndex n = 0;
  FrameIndex m = 0;
  SimTransform alignment;
  // Residual tangent distributed over [n, m], or over each half when split.
  SimTangent xi;
  bool split = false;
  FrameIndex mid = 0;
  SimTransform half;  // exp(xi) when split

  RigidPose evaluate(FrameIndex t, const RigidPose& slam_t) const {
    const SimTransform base = compose(alignment, embed_rigid(slam_t));
    if (!split) {
      const double alpha = static_cast<double>(t - n) / static_cast<double>(m - n);
      return project_rigid(compose(sim3_exp(alpha * xi), base), {.force = true});
    }
    if (t <= mid) {
      const double alpha = static_cast<double>(t - n) / static_cast<double>(mid - n);
      return project_rigid(compose(sim3_exp(alpha * xi), base), {.force = true});
    }
    const double alpha = static_cast<double>(t - mid) / static_cast<double>(m - mid);
    return project_rigid(compose(sim3_exp(alpha * xi), compose(half, base)), {.force = true});
  }

  // Alignment held after the interval end.
  SimTransform terminal() const {
    const SimTransform e = split ? compose(half, half) : sim3_exp(xi);
    return compose(e, alignment);
  }
};

IntervalModel build_interval(const AnchorCandidate& anchor_n, const AnchorCandidate& anchor_m, const Trajectory& slam,
                             const RefineConfig& config) {
  if (anchor_n.frame >= anchor_m.frame) {
    throw PreconditionError("refine", "interval requires n < m (got n=" + std::to_string(anchor_n.frame) +
                                          ", m=" + std::to_string(anchor_m.frame) + ")");
  }
  IntervalModel model;
  model.n = anchor_n.frame;
  model.m = anchor_m.frame;
  const RigidPose& slam_n = slam.pose_at(model.n);
  const RigidPose& slam_m = slam.pose_at(model.m);
  model.alignment = compute_alignment(anchor_n.pose, slam_n, config, anchor_m.pose, slam_m);
  const SimTransform residual = compute_residual(anchor_m.pose, model.alignment, slam_m);

  if (residual.rotation().angle() < std::numbers::pi - kCutLocusMargin) {
    model.xi = sim3_log(residual);
    return model;
  }
  if (config.cut_locus_policy == CutLocusPolicy::kError) {
    throw DomainError("refine", "residual between anchors " + std::to_string(model.n) + " and " +
                                    std::to_string(model.m) + " is on the rotation cut locus (log near rotation cut locus)");
  }
  if (model.m - model.n < 2) {
    throw DomainError("refine", "cannot split interval [" + std::to_string(model.n) + ", " +
                                    std::to_string(model.m) + "]: residual on the rotation cut locus and no midpoint frame");
  }
  model.split = true;
  model.mid = model.n + (model.m - model.n) / 2;
  model.xi = 0.5 * detail::sim3_log_unchecked(residual);
  model.half = sim3_exp(model.xi);
  return model;
}

void require_dense(const Trajectory& slam) {
  if (slam.empty()) {
    throw GapError("refine", "SLAM trajectory is empty");
  }
  for (std::size_t i = 1; i < slam.size(); ++i) {
    if (slam[i].frame != slam[i - 1].frame + 1) {
      throw GapError("refine", "SLAM trajectory misses frame " + std::to_string(slam[i - 1].frame + 1));
    }
  }
}

}  // namespace

std::string to_string(ScaleMode mode) { return mode == ScaleMode::kUnit ? "unit" : "ratio"; }

std::string to_string(CutLocusPolicy policy) { return policy == CutLocusPolicy::kError ? "error" : "split"; }

ScaleMode parse_scale_mode(std::string_view text) {
  if (text == "unit") return ScaleMode::kUnit;
  if (text == "ratio" || text == "anchor-distance-ratio") return ScaleMode::kAnchorDistanceRatio;
  throw InvalidArgumentError("refine", "unknown scale mode '" + std::string(text) + "' (expected unit|ratio)");
}

CutLocusPolicy parse_cut_locus_policy(std::string_view text) {
  if (text == "error") return CutLocusPolicy::kError;
  if (text == "split" || text == "split-interval") return CutLocusPolicy::kSplitInterval;
  throw InvalidArgumentError("refine", "unknown cut-locus policy '" + std::string(text) + "' (expected error|split)");
}

SimTransform compute_alignment(const RigidPose& anchor_start, const RigidPose& slam_start, const RefineConfig& config,
                               const std::optional<RigidPose>& anchor_end, const std::optional<RigidPose>& slam_end) {
  double scale = 1.0;
  if (config.scale_mode == ScaleMode::kAnchorDistanceRatio) {
    if (!anchor_end || !slam_end) {
      throw InvalidArgumentError("refine", "ratio scale mode needs both interval end poses");
    }
    const double slam_baseline = (slam_end->translation - slam_start.translation).norm();
    const double anchor_baseline = (anchor_end->translation - anchor_start.translation).norm();
    if (slam_baseline < kMinBaseline) {
      throw DegenerateError("refine", "degenerate SLAM baseline (" + format_double(slam_baseline) +
                                          " m) for anchor-distance-ratio scale");
    }
    if (anchor_baseline < kMinBaseline) {
      throw DegenerateError("refine", "degenerate anchor baseline (" + format_double(anchor_baseline) +
                                          " m) for anchor-distance-ratio scale");
    }
    scale = anchor_baseline / slam_baseline;
  }
  return compose(embed_rigid(anchor_start, scale), inverse(embed_rigid(slam_start)));
}

SimTransform compute_residual(const RigidPose& anchor_end, const SimTransform& alignment, const RigidPose& slam_end) {
  return compose(embed_rigid(anchor_end, alignment.scale()), inverse(compose(alignment, embed_rigid(slam_end))));
}

std::vector<RigidPose> interpolate_interval(const AnchorCandidate& anchor_n, const AnchorCandidate& anchor_m,
                                            const Trajectory& slam, const RefineConfig& config) {
  const IntervalModel model = build_interval(anchor_n, anchor_m, slam, config);
  std::vector<RigidPose> out;
  out.reserve(static_cast<std::size_t>(model.m - model.n + 1));
  for (FrameIndex t = model.n; t <= model.m; ++t) {
    out.push_back(model.evaluate(t, slam.pose_at(t)));
  }
  return out;
}

Trajectory align_at_anchor(const AnchorCandidate& anchor, const Trajectory& slam) {
  const SimTransform s = compute_alignment(anchor.pose, slam.pose_at(anchor.frame), RefineConfig{});
  Trajectory out(slam.fps());
  for (const auto& f : slam.frames()) {
    out.push_back(f.frame, apply(s, f.pose));
  }
  return out;
}

Trajectory refine_trajectory(const AnchorSet& anchors, const Trajectory& slam, const RefineConfig& config,
                             std::size_t threads) {
  if (anchors.empty()) {
    throw NoAnchorError("refine", "no reliable anchors to refine against");
  }
  require_dense(slam);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (i > 0 && anchors[i].frame <= anchors[i - 1].frame) {
      throw PreconditionError("refine", "anchors must be sorted by strictly increasing frame");
    }
    if (anchors[i].frame < slam.first_frame() || anchors[i].frame > slam.last_frame()) {
      throw GapError("refine", "anchor at frame " + std::to_string(anchors[i].frame) +
                                   " lies outside the SLAM coverage [" + std::to_string(slam.first_frame()) + ", " +
                                   std::to_string(slam.last_frame()) + "]");
    }
  }
  if (anchors.size() == 1) {
    return align_at_anchor(anchors.front(), slam);
  }

  const std::size_t n_intervals = anchors.size() - 1;
  std::vector<IntervalModel> models(n_intervals);
  std::vector<std::vector<RigidPose>> segments(n_intervals);
  parallel_for(n_intervals, threads, [&](std::size_t i) {
    models[i] = build_interval(anchors[i], anchors[i + 1], slam, config);
    const IntervalModel& model = models[i];
    // Interval i owns [n, m); the final interval also owns its end frame.
    const FrameIndex end = (i + 1 == n_intervals) ? model.m : model.m - 1;
    auto& seg = segments[i];
    seg.reserve(static_cast<std::size_t>(end - model.n + 1));
    for (FrameIndex t = model.n; t <= end; ++t) {
      seg.push_back(model.evaluate(t, slam.pose_at(t)));
    }
  });

  Trajectory out(slam.fps());
  const SimTransform head = models.front().alignment;
  for (const auto& f : slam.frames()) {
    if (f.frame >= anchors.front().frame) break;
    out.push_back(f.frame, apply(head, f.pose));
  }
  for (std::size_t i = 0; i < n_intervals; ++i) {
    FrameIndex t = models[i].n;
    for (const RigidPose& p : segments[i]) {
      out.push_back(t++, p);
    }
  }
  const SimTransform tail = models.back().terminal();
  for (FrameIndex t = anchors.back().frame + 1; t <= slam.last_frame(); ++t) {
    out.push_back(t, apply(tail, slam.pose_at(t)));
  }
  return out;
}

double CanonicalizationTransform::yaw() const {
  const auto& q = world_from_canonical.rotation;
  return 2.0 * std::atan2(q.z(), q.w());
}

CanonicalizedTrajectory canonicalize(const Trajectory& traj) {
  if (traj.empty()) {
    throw InvalidArgumentError("refine", "cannot canonicalize an empty trajectory");
  }
  const RigidPose& first = traj[0].pose;
  const Vec3 forward = first.rotation.rotate(Vec3::UnitX());
  const double horizontal = std::hypot(forward.x(), forward.y());
  if (horizontal < kMinHorizontalForward) {
    throw DegenerateError("refine", "degenerate heading: first forward axis is parallel to gravity");
  }
  const double yaw = std::atan2(forward.y(), forward.x());
  CanonicalizationTransform xf;
  xf.world_from_canonical = {so3_exp(Vec3(0.0, 0.0, yaw)), first.translation};

  const RigidPose canonical_from_world = xf.world_from_canonical.inverse();
  Trajectory out(traj.fps());
  for (const auto& f : traj.frames()) {
    out.push_back(f.frame, canonical_from_world * f.pose);
  }
  return {std::move(out), xf};
}

Trajectory uncanonicalize(const Trajectory& traj, const CanonicalizationTransform& xf) {
  Trajectory out(traj.fps());
  for (const auto& f : traj.frames()) {
    out.push_back(f.frame, xf.world_from_canonical * f.pose);
  }
  return out;
}

void write_canonicalization_transform(const CanonicalizationTransform& xf, const std::filesystem::path& path) {
  const auto& p = xf.world_from_canonical;
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "canonicalization";
  j["world_from_canonical"] = {
      {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
      {"rotation_wxyz", {p.rotation.w(), p.rotation.x(), p.rotation.y(), p.rotation.z()}},
  };
  j["yaw_rad"] = xf.yaw();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("refine", "cannot open " + path.string() + " for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw IoError("refine", "write failure on " + path.string());
  }
}

CanonicalizationTransform read_canonicalization_transform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("refine", "cannot open " + path.string() + " for reading");
  }
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ParseError(path.string(), 0, "unsupported format_version");
    }
    const auto& w = j.at("world_from_canonical");
    const auto t = w.at("translation").get<std::vector<double>>();
    const auto q = w.at("rotation_wxyz").get<std::vector<double>>();
    if (t.size() != 3 || q.size() != 4) {
      throw ParseError(path.string(), 0, "translation needs 3 and rotation_wxyz 4 entries");
    }
    CanonicalizationTransform xf;
    xf.world_from_canonical = {Rotation(q[0], q[1], q[2], q[3]), Vec3(t[0], t[1], t[2])};
    return xf;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

}  // namespace egotraj
