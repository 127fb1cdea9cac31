#include "egotraj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "egotraj/errors.hpp"
#include "egotraj/parallel.hpp"

namespace egotraj {

namespace {

constexpr double kMm = 1000.0;
constexpr double kRankTolerance = 1e-12;

double pairwise_sum_range(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}

FrameSeries finish(std::vector<FrameIndex> frames, std::vector<double> values) {
  FrameSeries s;
  s.mean = pairwise_mean(values);
  s.frames = std::move(frames);
  s.values = std::move(values);
  return s;
}

std::string frame_list(const std::vector<FrameIndex>& frames) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(frames.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += ", ";
    out += std::to_string(frames[i]);
  }
  if (frames.size() > shown) {
    out += ", ... (" + std::to_string(frames.size()) + " total)";
  }
  return out;
}

void require_same_frames(const Trajectory& pred, const Trajectory& gt) {
  std::vector<FrameIndex> only_pred;
  std::vector<FrameIndex> only_gt;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < pred.size() || j < gt.size()) {
    if (j == gt.size() || (i < pred.size() && pred[i].frame < gt[j].frame)) {
      only_pred.push_back(pred[i++].frame);
    } else if (i == pred.size() || gt[j].frame < pred[i].frame) {
      only_gt.push_back(gt[j++].frame);
    } else {
      ++i;
      ++j;
    }
  }
  if (!only_pred.empty() || !only_gt.empty()) {
    std::string msg = "frame sets differ;";
    if (!only_gt.empty()) msg += " missing from prediction: " + frame_list(only_gt) + ";";
    if (!only_pred.empty()) msg += " missing from ground truth: " + frame_list(only_pred) + ";";
    msg.pop_back();
    throw InvalidArgumentError("metrics", msg);
  }
  if (pred.empty()) {
    throw InvalidArgumentError("metrics", "trajectories are empty");
  }
}

void require_same_shape(const MotionSequence& pred, const MotionSequence& gt) {
  if (pred.frames.size() != gt.frames.size()) {
    throw InvalidArgumentError("metrics", "motion frame counts differ (" + std::to_string(pred.frames.size()) +
                                              " vs " + std::to_string(gt.frames.size()) + ")");
  }
  if (!(pred.layout == gt.layout)) {
    throw InvalidArgumentError("metrics", "motion joint layouts differ");
  }
  if (gt.frames.empty()) {
    throw InvalidArgumentError("metrics", "motion sequences are empty");
  }
}

std::vector<FrameIndex> motion_frames(const MotionSequence& m) {
  std::vector<FrameIndex> frames;
  frames.reserve(m.frames.size());
  for (const auto& f : m.frames) frames.push_back(f.frame);
  return frames;
}

double joint_error_mm(const JointPositions& a, const JointPositions& b) {
  std::array<double, kJointCount> d{};
  for (std::size_t k = 0; k < kJointCount; ++k) d[k] = (a[k] - b[k]).norm();
  return pairwise_mean(d) * kMm;
}

}  // namespace

double pairwise_sum(std::span<const double> values) { return pairwise_sum_range(values.data(), values.size()); }

double pairwise_mean(std::span<const double> values) {
  return values.empty() ? 0.0 : pairwise_sum(values) / static_cast<double>(values.size());
}

FrameSeries translation_error(const Trajectory& pred, const Trajectory& gt, std::size_t threads) {
  require_same_frames(pred, gt);
  std::vector<FrameIndex> frames(pred.size());
  std::vector<double> values(pred.size());
  parallel_for(pred.size(), threads, [&](std::size_t i) {
    frames[i] = pred[i].frame;
    values[i] = (pred[i].pose.translation - gt[i].pose.translation).norm() * kMm;
  });
  return finish(std::move(frames), std::move(values));
}

FrameSeries orientation_error(const Trajectory& pred, const Trajectory& gt, std::size_t threads) {
  require_same_frames(pred, gt);
  std::vector<FrameIndex> frames(pred.size());
  std::vector<double> values(pred.size());
  parallel_for(pred.size(), threads, [&](std::size_t i) {
    frames[i] = pred[i].frame;
    values[i] = (pred[i].pose.rotation.matrix() - gt[i].pose.rotation.matrix()).norm();
  });
  return finish(std::move(frames), std::move(values));
}

AlignmentResult umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale) {
  if (src.size() != dst.size()) {
    throw InvalidArgumentError("metrics", "alignment point sets differ in size");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw DegenerateError("metrics", "alignment needs at least 3 point pairs, got " + std::to_string(n));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Vec3 mu_s = Vec3::Zero();
  Vec3 mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s *= inv_n;
  mu_d *= inv_n;

  Mat3 cov = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 s = src[i] - mu_s;
    cov += (dst[i] - mu_d) * s.transpose();
    var_s += s.squaredNorm();
  }
  cov *= inv_n;
  var_s *= inv_n;

  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] < kRankTolerance * sv[0]) {
    throw DegenerateError("metrics", "degenerate configuration: point sets are collinear or coincident");
  }
  Vec3 sign(1.0, 1.0, 1.0);
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    sign[2] = -1.0;
  }
  const Mat3 r = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();

  AlignmentResult result;
  result.rotation = Rotation::from_matrix(r);
  result.scale = with_scale ? sv.dot(sign) / var_s : 1.0;
  const Mat3 sr = result.scale * r;
  result.translation = mu_d - sr * mu_s;

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = (dst[i] - (sr * src[i] + result.translation)).squaredNorm();
  }
  result.residual_rms = std::sqrt(pairwise_mean(sq));
  return result;
}

FrameSeries mpjpe(const MotionSequence& pred, const MotionSequence& gt, std::size_t threads) {
  require_same_shape(pred, gt);
  std::vector<double> values(gt.frames.size());
  parallel_for(values.size(), threads,
               [&](std::size_t i) { values[i] = joint_error_mm(pred.frames[i].joints, gt.frames[i].joints); });
  return finish(motion_frames(gt), std::move(values));
}

FrameSeries mpjpe_rigid(const MotionSequence& pred, const MotionSequence& gt, std::size_t threads) {
  require_same_shape(pred, gt);
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  src.reserve(gt.frames.size() * kJointCount);
  dst.reserve(gt.frames.size() * kJointCount);
  for (std::size_t i = 0; i < gt.frames.size(); ++i) {
    src.insert(src.end(), pred.frames[i].joints.begin(), pred.frames[i].joints.end());
    dst.insert(dst.end(), gt.frames[i].joints.begin(), gt.frames[i].joints.end());
  }
  const AlignmentResult align = umeyama_align(src, dst, false);
  std::vector<double> values(gt.frames.size());
  parallel_for(values.size(), threads, [&](std::size_t i) {
    JointPositions moved;
    for (std::size_t k = 0; k < kJointCount; ++k) moved[k] = align.apply(pred.frames[i].joints[k]);
    values[i] = joint_error_mm(moved, gt.frames[i].joints);
  });
  return finish(motion_frames(gt), std::move(values));
}

FrameSeries mpjpe_pa(const MotionSequence& pred, const MotionSequence& gt, std::size_t threads) {
  require_same_shape(pred, gt);
  std::vector<double> values(gt.frames.size());
  parallel_for(values.size(), threads, [&](std::size_t i) {
    const auto& p = pred.frames[i].joints;
    const auto& g = gt.frames[i].joints;
    AlignmentResult align;
    try {
      align = umeyama_align(p, g, true);
    } catch (const DegenerateError& e) {
      throw DegenerateError("metrics", "frame " + std::to_string(gt.frames[i].frame) + ": " + e.what());
    }
    JointPositions moved;
    for (std::size_t k = 0; k < kJointCount; ++k) moved[k] = align.apply(p[k]);
    values[i] = joint_error_mm(moved, g);
  });
  return finish(motion_frames(gt), std::move(values));
}

FrameSeries foot_sliding(const MotionSequence& motion, double ground_z, double height_threshold) {
  if (!(height_threshold > 0.0)) {
    throw InvalidArgumentError("metrics", "foot height threshold must be positive");
  }
  validate(motion.layout);
  const auto feet = motion.layout.foot_joints();
  const std::size_t n = motion.frames.size();
  std::vector<double> values(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    double sum = 0.0;
    for (int j : feet) {
      const Vec3& a = motion.frames[t - 1].joints[static_cast<std::size_t>(j)];
      const Vec3& b = motion.frames[t].joints[static_cast<std::size_t>(j)];
      const double h = a.z() - ground_z;
      if (h < height_threshold) {
        const double weight = 2.0 - std::exp2(h / height_threshold);
        sum += weight * (b - a).head<2>().norm();
      }
    }
    values[t] = sum * kMm;
  }
  FrameSeries s;
  s.frames = motion_frames(motion);
  s.mean = n < 2 ? 0.0 : pairwise_mean(std::span<const double>(values).subspan(1));
  s.values = std::move(values);
  return s;
}

FrameSeries foot_contact(const MotionSequence& motion, double ground_z) {
  validate(motion.layout);
  const auto feet = motion.layout.foot_joints();
  std::vector<double> values(motion.frames.size());
  for (std::size_t t = 0; t < motion.frames.size(); ++t) {
    double lowest = motion.frames[t].joints[static_cast<std::size_t>(feet[0])].z();
    for (int j : feet) lowest = std::min(lowest, motion.frames[t].joints[static_cast<std::size_t>(j)].z());
    values[t] = std::abs(lowest - ground_z) * kMm;
  }
  return finish(motion_frames(motion), std::move(values));
}

double estimate_ground_height(const MotionSequence& motion) {
  validate(motion.layout);
  std::vector<double> heights;
  for (const auto& f : motion.frames) {
    for (int j : motion.layout.foot_joints()) heights.push_back(f.joints[static_cast<std::size_t>(j)].z());
  }
  if (heights.empty()) {
    throw InvalidArgumentError("metrics", "cannot estimate ground height from an empty motion");
  }
  std::sort(heights.begin(), heights.end());
  const double pos = 0.05 * static_cast<double>(heights.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, heights.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return heights[lo] + frac * (heights[hi] - heights[lo]);
}

void validate(const MetricsConfig& config) {
  if (!std::isfinite(config.ground_z)) {
    throw InvalidArgumentError("metrics", "ground_z must be finite");
  }
  if (!(config.foot_height_threshold > 0.0) || !std::isfinite(config.foot_height_threshold)) {
    throw InvalidArgumentError("metrics", "foot height threshold must be positive");
  }
}

MetricsReport evaluate_all(const Trajectory& pred_traj, const Trajectory& gt_traj, const MotionSequence* pred_motion,
                           const MotionSequence* gt_motion, const MetricsConfig& config, std::size_t threads) {
  validate(config);
  if ((pred_motion == nullptr) != (gt_motion == nullptr)) {
    throw InvalidArgumentError("metrics", "motion metrics need both predicted and ground-truth motion");
  }
  MetricsReport report;
  report.t_neck_mm = translation_error(pred_traj, gt_traj, threads);
  report.o_neck = orientation_error(pred_traj, gt_traj, threads);
  if (pred_motion != nullptr) {
    report.mpjpe_mm = mpjpe(*pred_motion, *gt_motion, threads);
    report.mpjpe_rigid_mm = mpjpe_rigid(*pred_motion, *gt_motion, threads);
    report.mpjpe_pa_mm = mpjpe_pa(*pred_motion, *gt_motion, threads);
    const double ground = config.estimate_ground ? estimate_ground_height(*gt_motion) : config.ground_z;
    report.ground_z = ground;
    report.fs_mm = foot_sliding(*pred_motion, ground, config.foot_height_threshold);
    report.fc_mm = foot_contact(*pred_motion, ground);
  }
  return report;
}

std::string metrics_report_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "metrics_report";
  j["t_neck_mm"] = report.t_neck_mm.mean;
  j["o_neck"] = report.o_neck.mean;
  const std::pair<const char*, const std::optional<FrameSeries>*> motion_fields[] = {
      {"mpjpe_mm", &report.mpjpe_mm}, {"mpjpe_rigid_mm", &report.mpjpe_rigid_mm}, {"mpjpe_pa_mm", &report.mpjpe_pa_mm},
      {"fs_mm", &report.fs_mm},       {"fc_mm", &report.fc_mm},
  };
  for (const auto& [name, series] : motion_fields) {
    if (series->has_value()) j[name] = (*series)->mean;
  }
  if (report.ground_z) j["ground_z"] = *report.ground_z;

  nlohmann::ordered_json per_frame;
  per_frame["trajectory"]["frame"] = report.t_neck_mm.frames;
  per_frame["trajectory"]["t_neck_mm"] = report.t_neck_mm.values;
  per_frame["trajectory"]["o_neck"] = report.o_neck.values;
  if (report.mpjpe_mm) {
    per_frame["motion"]["frame"] = report.mpjpe_mm->frames;
    for (const auto& [name, series] : motion_fields) {
      if (series->has_value()) per_frame["motion"][name] = (*series)->values;
    }
  }
  j["per_frame"] = std::move(per_frame);
  return j.dump(2) + "\n";
}

void write_metrics_report(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("metrics", "cannot open " + path.string() + " for writing");
  }
  out << metrics_report_json(report);
  if (!out) {
    throw IoError("metrics", "write failure on " + path.string());
  }
}

}  // namespace egotraj
