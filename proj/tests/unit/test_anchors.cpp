#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "egotraj/anchors.hpp"
#include "egotraj/errors.hpp"
#include "oracles.hpp"

namespace egotraj {
namespace {

AnchorCandidate cand(FrameIndex frame, std::int64_t count, double ratio) {
  return {frame, RigidPose{}, count, ratio};
}

std::vector<FrameIndex> frames_of(const AnchorSet& set) {
  std::vector<FrameIndex> out;
  for (const auto& a : set) out.push_back(a.frame);
  return out;
}

TEST(AnchorsTest, DefaultsMatchThresholds) {
  const AnchorFilterConfig c;
  EXPECT_EQ(c.min_inlier_count, 500);
  EXPECT_EQ(c.min_inlier_ratio, 0.5);
  EXPECT_EQ(c.min_interval_frames, 20);
}

TEST(AnchorsTest, SpacingConflictFixture) {
  const std::vector<AnchorCandidate> c = {cand(0, 600, 0.6), cand(5, 700, 0.7), cand(30, 100, 0.8),
                                          cand(60, 800, 0.55)};
  EXPECT_EQ(frames_of(filter_anchors(c)), (std::vector<FrameIndex>{5, 60}));
}

TEST(AnchorsTest, HandTracedFixtures) {
  // Equal counts keep the earlier anchor.
  EXPECT_EQ(frames_of(filter_anchors({cand(0, 600, 0.6), cand(10, 600, 0.9)})), (std::vector<FrameIndex>{0}));
  // Thresholds are inclusive.
  EXPECT_EQ(frames_of(filter_anchors({cand(0, 500, 0.5), cand(20, 499, 0.9), cand(40, 900, 0.4999)})),
            (std::vector<FrameIndex>{0}));
  // Spacing is measured from the last accepted anchor: 0 -> 15 replaces, then 30 conflicts with 15.
  EXPECT_EQ(frames_of(filter_anchors({cand(0, 600, 0.6), cand(15, 700, 0.6), cand(30, 650, 0.6),
                                      cand(35, 900, 0.6)})),
            (std::vector<FrameIndex>{15, 35}));
  // Exactly min_interval apart is not a conflict.
  EXPECT_EQ(frames_of(filter_anchors({cand(0, 600, 0.6), cand(20, 550, 0.6)})), (std::vector<FrameIndex>{0, 20}));
  EXPECT_TRUE(filter_anchors({}).empty());
}

TEST(AnchorsTest, Preconditions) {
  EXPECT_THROW(filter_anchors({cand(10, 600, 0.6), cand(5, 600, 0.6)}), PreconditionError);
  AnchorFilterConfig bad;
  bad.min_inlier_ratio = 1.5;
  EXPECT_THROW(validate(bad), InvalidArgumentError);
  bad = {};
  bad.min_interval_frames = 0;
  EXPECT_THROW(validate(bad), InvalidArgumentError);
  bad = {};
  bad.min_inlier_count = -1;
  EXPECT_THROW(validate(bad), InvalidArgumentError);
}

TEST(AnchorsTest, CoverageReport) {
  const AnchorSet two = {cand(5, 600, 0.6), cand(60, 600, 0.6)};
  const AnchorCoverage r = anchor_coverage_report(two, 100);
  EXPECT_EQ(r.anchor_count, 2u);
  EXPECT_EQ(r.largest_gap, 55);
  EXPECT_EQ(r.head_span, 5);
  EXPECT_EQ(r.tail_span, 39);

  const AnchorCoverage none = anchor_coverage_report({}, 100);
  EXPECT_EQ(none.anchor_count, 0u);
  EXPECT_EQ(none.head_span, 100);

  const AnchorCoverage single = anchor_coverage_report({cand(0, 600, 0.6)}, 1);
  EXPECT_EQ(single.largest_gap, 0);
  EXPECT_EQ(single.head_span, 0);
  EXPECT_EQ(single.tail_span, 0);
}

std::vector<AnchorCandidate> random_list(Rng& rng) {
  std::vector<AnchorCandidate> out;
  const auto n = rng.integer(0, 60);
  FrameIndex f = rng.integer(0, 5);
  for (std::int64_t i = 0; i < n; ++i) {
    out.push_back(cand(f, rng.integer(0, 1500), rng.uniform()));
    f += rng.integer(1, 25);
  }
  return out;
}

bool is_subsequence(const AnchorSet& sub, const std::vector<AnchorCandidate>& all) {
  std::size_t j = 0;
  for (const auto& c : all) {
    if (j < sub.size() && sub[j].frame == c.frame && sub[j].inlier_count == c.inlier_count) ++j;
  }
  return j == sub.size();
}

TEST(AnchorsTest, OutputPropertiesOnRandomLists) {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto list = random_list(rng);
    AnchorFilterConfig cfg;
    cfg.min_inlier_count = rng.integer(0, 1000);
    cfg.min_inlier_ratio = rng.uniform();
    cfg.min_interval_frames = rng.integer(1, 40);
    const AnchorSet out = filter_anchors(list, cfg);
    EXPECT_TRUE(is_subsequence(out, list));
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_GE(out[i].inlier_count, cfg.min_inlier_count);
      EXPECT_GE(out[i].inlier_ratio, cfg.min_inlier_ratio);
      if (i > 0) EXPECT_GE(out[i].frame - out[i - 1].frame, cfg.min_interval_frames);
    }
    EXPECT_EQ(frames_of(filter_anchors(out, cfg)), frames_of(out));
  }
}

bool frame_subset(const AnchorSet& a, const AnchorSet& b) {
  const auto fa = frames_of(a);
  const auto fb = frames_of(b);
  return std::includes(fb.begin(), fb.end(), fa.begin(), fa.end());
}

TEST(AnchorsTest, RaisingThresholdsNeverAddsWithoutSpacing) {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const auto list = random_list(rng);
    for (std::int64_t c0 : {0, 300, 600, 900}) {
      for (double r0 : {0.0, 0.3, 0.6}) {
        const AnchorFilterConfig lo{c0, r0, 1};
        const AnchorFilterConfig hi_count{c0 + 200, r0, 1};
        const AnchorFilterConfig hi_ratio{c0, r0 + 0.2, 1};
        const AnchorSet base = filter_anchors(list, lo);
        EXPECT_TRUE(frame_subset(filter_anchors(list, hi_count), base));
        EXPECT_TRUE(frame_subset(filter_anchors(list, hi_ratio), base));
      }
    }
  }
}

TEST(AnchorsTest, GreedySpacingBreaksMonotonicity) {
  const std::vector<AnchorCandidate> list = {cand(0, 600, 0.9), cand(15, 700, 0.5), cand(30, 600, 0.9)};
  const AnchorSet loose = filter_anchors(list, {500, 0.5, 20});
  const AnchorSet strict = filter_anchors(list, {500, 0.6, 20});
  EXPECT_EQ(frames_of(loose), (std::vector<FrameIndex>{15}));
  EXPECT_EQ(frames_of(strict), (std::vector<FrameIndex>{0, 30}));
  EXPECT_FALSE(frame_subset(strict, loose));
}

}  // namespace
}  // namespace egotraj
