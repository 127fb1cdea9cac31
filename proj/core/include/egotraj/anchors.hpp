#pragma once

// Selection of reliable absolute-pose anchors from localization candidates.

#include <cstdint>
#include <vector>

#include "egotraj/trajio.hpp"

namespace egotraj {

struct AnchorFilterConfig {
  std::int64_t min_inlier_count = 500;
  double min_inlier_ratio = 0.5;
  std::int64_t min_interval_frames = 20;
};

// Throws InvalidArgumentError on out-of-range fields.
void validate(const AnchorFilterConfig& config);

// Candidates that passed both inlier thresholds, strictly increasing in frame
// and at least `min_interval_frames` apart.
using AnchorSet = std::vector<AnchorCandidate>;

// Keeps candidates with inlier_count >= min_inlier_count and
// inlier_ratio >= min_inlier_ratio, then scans them in frame order: a survivor
// closer than min_interval_frames to the last accepted anchor replaces it only
// if its inlier_count is strictly higher.
// Throws PreconditionError if the candidates are not sorted by frame.
AnchorSet filter_anchors(const std::vector<AnchorCandidate>& candidates, const AnchorFilterConfig& config = {});

struct AnchorCoverage {
  std::size_t anchor_count = 0;
  // Largest frame gap between consecutive anchors (0 with fewer than two).
  std::int64_t largest_gap = 0;
  // Frames before the first anchor / after the last one.
  std::int64_t head_span = 0;
  std::int64_t tail_span = 0;
};

AnchorCoverage anchor_coverage_report(const AnchorSet& anchors, std::int64_t total_frames);

}  // namespace egotraj
