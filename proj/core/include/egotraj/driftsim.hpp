#pragma once

// Synthetic ground truth, monocular-SLAM-style drift and noisy localization
// candidates. Every generator is a pure function of its config and seed.

#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "egotraj/anchors.hpp"
#include "egotraj/refine.hpp"
#include "egotraj/trajio.hpp"

namespace egotraj {

enum class PathStyle { kLoop, kCorridor, kRandomWalk };

std::string to_string(PathStyle style);
PathStyle parse_path_style(std::string_view text);

struct PathConfig {
  PathStyle style = PathStyle::kLoop;
  // Mean walking speed, m/s.
  double speed = 0.08;
  double camera_height = 1.4;
  // Upper bound of the pitch oscillation amplitude.
  double max_pitch = 10.0 * std::numbers::pi / 180.0;
};

// Camera trajectory through a Catmull-Rom spline (C1 position), heading along
// the velocity, pitch oscillating within +-max_pitch and zero roll. Loops
// return to their start. Throws InvalidArgumentError for n_frames < 2 or
// fps <= 0.
Trajectory generate_gt_trajectory(std::uint64_t seed, std::int64_t n_frames, double fps,
                                  const PathConfig& path = {});

struct DriftConfig {
  double scale_drift_per_frame = 0.002;
  double rot_noise_sigma = 2e-4;    // rad per frame
  double trans_noise_sigma = 3e-4;  // m per frame
  std::uint64_t rng_seed = 0;
};

void validate(const DriftConfig& config);

// Re-expresses gt in its first frame and compounds a right-multiplied Sim(3)
// increment per step: Q_{t+1} = Q_t * (gt_t^-1 gt_{t+1}) * N_t, where N_t
// has scale 1 + scale_drift_per_frame and Gaussian rotation/translation
// noise. Scale of Q is dropped on output.
Trajectory corrupt_to_slam(const Trajectory& gt, const DriftConfig& config);

struct InlierStatsRange {
  std::int64_t count_min = 0;
  std::int64_t count_max = 0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
};

struct AnchorNoiseConfig {
  double pose_trans_sigma = 0.005;
  double pose_rot_sigma = 0.2 * std::numbers::pi / 180.0;
  std::int64_t anchor_period = 40;
  double outlier_fraction = 0.1;
  double outlier_trans_range = 10.0;
  InlierStatsRange good_stats{600, 1200, 0.55, 0.9};
  InlierStatsRange bad_stats{10, 400, 0.05, 0.45};
  std::uint64_t rng_seed = 0;
};

void validate(const AnchorNoiseConfig& config);

struct SyntheticCandidates {
  std::vector<AnchorCandidate> candidates;
  // Parallel to candidates.
  std::vector<bool> is_outlier;
};

// One candidate every anchor_period frames starting at the first gt frame.
SyntheticCandidates synthesize_anchor_candidates(const Trajectory& gt, const AnchorNoiseConfig& config);

struct ScenarioConfig {
  std::int64_t frames = 400;
  double fps = 10.0;
  PathConfig path;
  DriftConfig drift;
  AnchorNoiseConfig anchors;
  AnchorFilterConfig filter;
  RefineConfig refine{.scale_mode = ScaleMode::kAnchorDistanceRatio};
};

struct ScenarioInputs {
  Trajectory gt;
  Trajectory slam;
  SyntheticCandidates candidates;
};

// The three generators run on sub-seeds of `seed`; config seeds are ignored.
ScenarioInputs make_scenario_inputs(std::uint64_t seed, const ScenarioConfig& config = {});

struct ScenarioBundle {
  Trajectory gt;
  Trajectory slam;
  SyntheticCandidates candidates;
  AnchorSet anchors;
  // SLAM aligned at the first anchor only.
  Trajectory unrefined;
  Trajectory refined;
  double unrefined_final_error = 0.0;  // m
  double unrefined_rmse = 0.0;         // m
  double refined_rmse = 0.0;           // m
  // unrefined_rmse / refined_rmse (infinite when the refinement is exact)
  double improvement_ratio = 0.0;
};

// Translation RMSE between trajectories with identical frame sets, meters.
double translation_rmse(const Trajectory& pred, const Trajectory& gt);

// make_scenario_inputs followed by filtering, refinement and scoring.
ScenarioBundle end_to_end_scenario(std::uint64_t seed, const ScenarioConfig& config = {});

}  // namespace egotraj
