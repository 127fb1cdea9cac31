#pragma once

// Trajectory and body-motion error metrics. Inputs are in meters; reported
// values are in millimeters except the orientation error, which is a raw
// Frobenius norm.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egotraj/geom.hpp"
#include "egotraj/trajio.hpp"

namespace egotraj {

// Deterministic pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);
double pairwise_mean(std::span<const double> values);

struct FrameSeries {
  std::vector<FrameIndex> frames;
  std::vector<double> values;
  double mean = 0.0;
};

// Per-frame translation distance in mm. Throws InvalidArgumentError listing
// the frames present in only one trajectory.
FrameSeries translation_error(const Trajectory& pred, const Trajectory& gt, std::size_t threads = 1);
// Per-frame ||R_pred - R_gt||_F.
FrameSeries orientation_error(const Trajectory& pred, const Trajectory& gt, std::size_t threads = 1);

struct AlignmentResult {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  double residual_rms = 0.0;

  Vec3 apply(const Vec3& p) const { return scale * rotation.rotate(p) + translation; }
};

// Least-squares fit of dst ~ s R src + t (s = 1 unless with_scale). Throws
// InvalidArgumentError on size mismatch and DegenerateError for fewer than 3
// pairs or a rank-deficient cross-covariance (e.g. collinear points).
AlignmentResult umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale);

// Mean joint distance per frame, mm. Sequences must have equal frame counts
// and layouts; series frames are taken from gt.
FrameSeries mpjpe(const MotionSequence& pred, const MotionSequence& gt, std::size_t threads = 1);
// One rigid alignment of all pred joints onto gt, then MPJPE.
FrameSeries mpjpe_rigid(const MotionSequence& pred, const MotionSequence& gt, std::size_t threads = 1);
// Per-frame similarity (Procrustes) alignment, then MPJPE.
FrameSeries mpjpe_pa(const MotionSequence& pred, const MotionSequence& gt, std::size_t threads = 1);

// Foot sliding, mm. For each transition t-1 -> t and foot joint whose height
// h above ground (at t-1) is below `height_threshold`, the horizontal
// displacement weighted by 2 - 2^(h / height_threshold) is added. The series
// holds the per-transition sums (0 at the first frame); the mean runs over
// transitions.
FrameSeries foot_sliding(const MotionSequence& motion, double ground_z, double height_threshold = 0.05);
// Per-frame |lowest foot joint z - ground_z|, mm.
FrameSeries foot_contact(const MotionSequence& motion, double ground_z);
// 5th percentile (linear interpolation) of all foot-joint heights.
double estimate_ground_height(const MotionSequence& motion);

struct MetricsConfig {
  double ground_z = 0.0;
  bool estimate_ground = false;
  double foot_height_threshold = 0.05;
};

void validate(const MetricsConfig& config);

struct MetricsReport {
  FrameSeries t_neck_mm;
  FrameSeries o_neck;
  // Present only when both motion sequences were supplied.
  std::optional<FrameSeries> mpjpe_mm;
  std::optional<FrameSeries> mpjpe_rigid_mm;
  std::optional<FrameSeries> mpjpe_pa_mm;
  std::optional<FrameSeries> fs_mm;
  std::optional<FrameSeries> fc_mm;
  std::optional<double> ground_z;
};

// Foot metrics are computed on the predicted motion. With estimate_ground the
// ground height comes from the gt motion.
MetricsReport evaluate_all(const Trajectory& pred_traj, const Trajectory& gt_traj, const MotionSequence* pred_motion,
                           const MotionSequence* gt_motion, const MetricsConfig& config = {},
                           std::size_t threads = 1);

std::string metrics_report_json(const MetricsReport& report);
void write_metrics_report(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace egotraj
