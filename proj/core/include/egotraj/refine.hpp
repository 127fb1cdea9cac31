#pragma once

// Drift correction of a monocular SLAM trajectory against sparse absolute
// anchors, plus yaw-only canonicalization.
//
// For consecutive anchors n < m the SLAM segment is first aligned at n,
//     S = P_loc(n) * P_slam(n)^-1,
// the leftover misalignment at m is
//     E = P_loc(m) * (S * P_slam(m))^-1,
// and every frame in between receives a share of it in the Lie algebra,
//     P(t) = exp(a_t * log E) * S * P_slam(t),   a_t = (t - n) / (m - n).
// Frames outside [first anchor, last anchor] keep the nearest alignment
// (S of the first interval, E * S of the last one).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egotraj/anchors.hpp"
#include "egotraj/geom.hpp"
#include "egotraj/trajio.hpp"

namespace egotraj {

enum class ScaleMode {
  // S and E exactly as products of SE(3) poses; unit scale throughout.
  kUnit,
  // S carries the ratio of anchor baseline to SLAM baseline of the interval.
  kAnchorDistanceRatio,
};

enum class ExtrapolationMode { kHoldAlignment };

enum class CutLocusPolicy {
  kError,
  // Insert a pseudo-anchor at the interval midpoint carrying half of the
  // residual and interpolate both halves.
  kSplitInterval,
};

struct RefineConfig {
  ScaleMode scale_mode = ScaleMode::kUnit;
  ExtrapolationMode extrapolation_mode = ExtrapolationMode::kHoldAlignment;
  CutLocusPolicy cut_locus_policy = CutLocusPolicy::kSplitInterval;
};

std::string to_string(ScaleMode mode);
std::string to_string(CutLocusPolicy policy);
// Accepts "unit", "ratio" and "anchor-distance-ratio".
ScaleMode parse_scale_mode(std::string_view text);
// Accepts "error", "split" and "split-interval".
CutLocusPolicy parse_cut_locus_policy(std::string_view text);

// Alignment S of the SLAM frame to the world frame at the interval start.
// In ratio mode the anchor/SLAM end poses are required; the scale is applied
// about the SLAM start position so S maps slam_start onto anchor_start.
// Throws DegenerateError when a baseline is shorter than 1e-6 m.
SimTransform compute_alignment(const RigidPose& anchor_start, const RigidPose& slam_start, const RefineConfig& config,
                               const std::optional<RigidPose>& anchor_end = std::nullopt,
                               const std::optional<RigidPose>& slam_end = std::nullopt);

// Residual E with E * S * slam_end == anchor_end. The anchor is embedded at
// S's scale, so E is scale-free and in unit mode reduces to
// anchor_end * (S * slam_end)^-1.
SimTransform compute_residual(const RigidPose& anchor_end, const SimTransform& alignment, const RigidPose& slam_end);

// Refined poses for frames n..m inclusive (n = anchor_n.frame). Throws
// PreconditionError unless n < m, GapError when the SLAM trajectory misses a
// frame of the interval, and DomainError for a cut-locus residual under
// CutLocusPolicy::kError.
std::vector<RigidPose> interpolate_interval(const AnchorCandidate& anchor_n, const AnchorCandidate& anchor_m,
                                            const Trajectory& slam, const RefineConfig& config);

// Refines every SLAM frame. The SLAM trajectory must be dense (consecutive
// frame indices) and contain every anchor frame. Intervals are processed on
// up to `threads` workers; the result does not depend on the thread count.
// Throws NoAnchorError without anchors and GapError on coverage holes.
Trajectory refine_trajectory(const AnchorSet& anchors, const Trajectory& slam, const RefineConfig& config = {},
                             std::size_t threads = 1);

// SLAM aligned rigidly at a single anchor, with no residual distribution.
Trajectory align_at_anchor(const AnchorCandidate& anchor, const Trajectory& slam);

struct CanonicalizationTransform {
  // Yaw about +z followed by a translation.
  RigidPose world_from_canonical;

  double yaw() const;
};

struct CanonicalizedTrajectory {
  Trajectory trajectory;
  CanonicalizationTransform transform;
};

// Moves the first frame to the origin and turns its horizontal heading onto
// +x; pitch and roll are untouched so gravity stays along -z. Throws
// InvalidArgumentError for an empty trajectory and DegenerateError when the
// first forward axis is within 1e-6 of vertical.
CanonicalizedTrajectory canonicalize(const Trajectory& traj);
Trajectory uncanonicalize(const Trajectory& traj, const CanonicalizationTransform& xf);

void write_canonicalization_transform(const CanonicalizationTransform& xf, const std::filesystem::path& path);
CanonicalizationTransform read_canonicalization_transform(const std::filesystem::path& path);

}  // namespace egotraj
