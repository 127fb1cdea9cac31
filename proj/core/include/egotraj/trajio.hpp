#pragma once

// Data model and file formats for trajectories, anchor candidates, motion
// sequences and point clouds.
//
// CSV files are line oriented UTF-8. Metadata lines start with '#' and carry
// `key: value` pairs; the first non-comment line names the columns:
//
//   # format_version: 1
//   # kind: trajectory
//   # fps: 10
//   # convention: camera-to-world
//   frame,tx,ty,tz,qw,qx,qy,qz
//   0,1.5,0,1.4,1,0,0,0
//
// Anchor candidate files append `inlier_count,inlier_ratio`. Motion files use
// `frame,j0_x,j0_y,j0_z,...,j21_z` plus `joints` and `layout` metadata.
// Units are meters and seconds. The world frame is right-handed and z-up;
// a camera looks along its rotated +x axis. Numbers are written in the
// shortest representation that reads back to the identical double.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egotraj/geom.hpp"

namespace egotraj {

inline constexpr int kFormatVersion = 1;
inline constexpr std::size_t kJointCount = 22;

using FrameIndex = std::int64_t;

struct TrajectoryFrame {
  FrameIndex frame = 0;
  RigidPose pose;
};

// Frame-indexed pose sequence with strictly increasing indices.
class Trajectory {
 public:
  explicit Trajectory(double fps = 10.0);
  Trajectory(double fps, std::vector<TrajectoryFrame> frames);

  double fps() const { return fps_; }
  const std::vector<TrajectoryFrame>& frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const TrajectoryFrame& operator[](std::size_t i) const { return frames_[i]; }

  // Throws InvariantError if `frame` does not exceed the last index.
  void push_back(FrameIndex frame, const RigidPose& pose);

  std::optional<std::size_t> find(FrameIndex frame) const;
  // Throws GapError when the frame is absent.
  const RigidPose& pose_at(FrameIndex frame) const;

  FrameIndex first_frame() const { return frames_.front().frame; }
  FrameIndex last_frame() const { return frames_.back().frame; }

 private:
  double fps_;
  std::vector<TrajectoryFrame> frames_;
};

struct AnchorCandidate {
  FrameIndex frame = 0;
  RigidPose pose;
  std::int64_t inlier_count = 0;
  double inlier_ratio = 0.0;
};

// Throws InvariantError on out-of-range statistics.
void validate(const AnchorCandidate& c);

struct PointCloud {
  std::vector<Vec3> points;
  // Either empty or one RGB triple per point.
  std::vector<std::array<std::uint8_t, 3>> colors;
};

// Joint indices the metrics need. Defaults follow the SMPL-X body joint order
// (pelvis 0, ankles 7/8, feet 10/11, neck 12).
struct JointLayout {
  int root = 0;
  int neck = 12;
  int left_foot = 7;
  int right_foot = 8;
  int left_toe = 10;
  int right_toe = 11;

  std::array<int, 4> foot_joints() const { return {left_foot, right_foot, left_toe, right_toe}; }
  friend bool operator==(const JointLayout&, const JointLayout&) = default;
};

// Throws InvariantError unless indices are distinct and in [0, 22).
void validate(const JointLayout& layout);

using JointPositions = std::array<Vec3, kJointCount>;

struct MotionFrame {
  FrameIndex frame = 0;
  JointPositions joints{};
};

struct MotionSequence {
  double fps = 10.0;
  JointLayout layout;
  std::vector<MotionFrame> frames;
};

// Throws InvariantError on non-increasing frames, non-finite coordinates,
// a bad layout or fps <= 0.
void validate(const MotionSequence& motion);

enum class PoseConvention { kCameraToWorld, kWorldToCamera };

// Shortest round-trip decimal representation.
std::string format_double(double v);

// --- trajectories -----------------------------------------------------------

Trajectory parse_trajectory(std::istream& in, const std::string& source = "<stream>");
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(const Trajectory& traj, std::ostream& out, std::string_view kind = "trajectory");
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                      std::string_view kind = "trajectory");

// --- anchor candidates ------------------------------------------------------

std::vector<AnchorCandidate> parse_anchor_candidates(std::istream& in, const std::string& source = "<stream>");
std::vector<AnchorCandidate> read_anchor_candidates(const std::filesystem::path& path);
void write_anchor_candidates(const std::vector<AnchorCandidate>& candidates, std::ostream& out);
void write_anchor_candidates(const std::vector<AnchorCandidate>& candidates, const std::filesystem::path& path);

// --- motion -----------------------------------------------------------------

MotionSequence parse_motion(std::istream& in, const std::string& source = "<stream>");
MotionSequence read_motion(const std::filesystem::path& path);
void write_motion(const MotionSequence& motion, std::ostream& out);
void write_motion(const MotionSequence& motion, const std::filesystem::path& path);

// --- point clouds (PLY) -----------------------------------------------------

enum class PlyEncoding { kAscii, kBinaryLittleEndian };

// Accepts ASCII and binary little-endian PLY with float/double x, y, z vertex
// properties. Other vertex properties are skipped; uchar red/green/blue are
// kept as colors.
PointCloud parse_pointcloud_ply(std::string_view data, const std::string& source = "<memory>");
PointCloud read_pointcloud_ply(const std::filesystem::path& path);
void write_pointcloud_ply(const PointCloud& cloud, const std::filesystem::path& path,
                          PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);
std::string encode_pointcloud_ply(const PointCloud& cloud, PlyEncoding encoding);

}  // namespace egotraj
