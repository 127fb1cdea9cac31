#include "egotraj/anchors.hpp"

#include <algorithm>
#include <string>

#include "egotraj/errors.hpp"

namespace egotraj {

void validate(const AnchorFilterConfig& config) {
  if (config.min_inlier_count < 0) {
    throw InvalidArgumentError("anchors", "min_inlier_count must be >= 0");
  }
  if (!(config.min_inlier_ratio >= 0.0 && config.min_inlier_ratio <= 1.0)) {
    throw InvalidArgumentError("anchors", "min_inlier_ratio must lie in [0,1]");
  }
  if (config.min_interval_frames < 1) {
    throw InvalidArgumentError("anchors", "min_interval_frames must be >= 1");
  }
}

AnchorSet filter_anchors(const std::vector<AnchorCandidate>& candidates, const AnchorFilterConfig& config) {
  validate(config);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].frame <= candidates[i - 1].frame) {
      throw PreconditionError("anchors", "anchor candidates must be sorted by strictly increasing frame (frame " +
                                             std::to_string(candidates[i].frame) + " follows " +
                                             std::to_string(candidates[i - 1].frame) + ")");
    }
  }

  AnchorSet accepted;
  for (const AnchorCandidate& c : candidates) {
    if (c.inlier_count < config.min_inlier_count || c.inlier_ratio < config.min_inlier_ratio) {
      continue;
    }
    if (accepted.empty() || c.frame - accepted.back().frame >= config.min_interval_frames) {
      accepted.push_back(c);
    } else if (c.inlier_count > accepted.back().inlier_count) {
      // The replacement sits later than the anchor it displaces, so the gap
      // to the anchor before it only grows.
      accepted.back() = c;
    }
  }
  return accepted;
}

AnchorCoverage anchor_coverage_report(const AnchorSet& anchors, std::int64_t total_frames) {
  if (total_frames < 0) {
    throw InvalidArgumentError("anchors", "total_frames must be >= 0");
  }
  AnchorCoverage report;
  report.anchor_count = anchors.size();
  if (anchors.empty()) {
    report.head_span = total_frames;
    report.tail_span = total_frames;
    return report;
  }
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    report.largest_gap = std::max(report.largest_gap, anchors[i].frame - anchors[i - 1].frame);
  }
  report.head_span = std::min(anchors.front().frame, total_frames);
  report.tail_span = std::max<std::int64_t>(0, total_frames - anchors.back().frame - 1);
  return report;
}

}  // namespace egotraj
