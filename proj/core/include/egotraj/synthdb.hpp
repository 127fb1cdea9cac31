#pragma once

// Virtual camera poses sampled over a metric point cloud for building a
// synthetic localization database. Only the geometry is produced here; image
// rendering and feature extraction happen elsewhere.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <vector>

#include "egotraj/geom.hpp"
#include "egotraj/kdtree.hpp"
#include "egotraj/trajio.hpp"

namespace egotraj {

struct GridSamplerConfig {
  double spacing_xy = 0.15;
  double spacing_z = 0.25;
  double z_min = 0.5;
  double z_max = 1.75;
  double clearance = 0.2;
  double pitch_min = -std::numbers::pi / 6.0;
  double pitch_max = std::numbers::pi / 6.0;
  std::int64_t yaws_per_position = 8;
  std::uint64_t rng_seed = 0;
};

// Throws InvalidArgumentError on non-positive spacings/clearance, z_min > z_max,
// a pitch range outside (-pi/2, pi/2) or fewer than one yaw.
void validate(const GridSamplerConfig& config);

using GridCell = std::array<std::int64_t, 3>;

struct DatabaseEntry {
  RigidPose pose;
  GridCell grid_cell{};
  std::int64_t sample_id = 0;
};

// Node layout of the sampling grid: x and y span the cloud's bounding box,
// z runs over [z_min, z_max].
struct SamplingGrid {
  Vec3 origin = Vec3::Zero();
  double spacing_xy = 0.0;
  double spacing_z = 0.0;
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  std::int64_t node_count() const { return nx * ny * nz; }
  Vec3 position(const GridCell& cell) const;
  // Cells in emission order: x-major, then y, then z.
  GridCell cell(std::int64_t linear) const;
};

SamplingGrid make_sampling_grid(const PointCloud& cloud, const GridSamplerConfig& config);

KdTree build_index(const PointCloud& cloud);

// Orientation of a camera looking along `yaw` about +z, tilted up by `pitch`,
// with zero roll (forward is the rotated +x axis).
Rotation camera_orientation(double yaw, double pitch);

// Emits yaws_per_position poses at every grid node whose nearest cloud point
// is at least `clearance` away. Yaw j is 2*pi*j/yaws_per_position; pitch is
// drawn uniformly from the configured range with a stream seeded by
// (rng_seed, cell), so output does not depend on `threads`.
std::vector<DatabaseEntry> sample_camera_grid(const PointCloud& cloud, const KdTree& index,
                                              const GridSamplerConfig& config, std::size_t threads = 1);

// Trajectory-CSV export (kind "database", sample_id as frame index).
Trajectory database_trajectory(const std::vector<DatabaseEntry>& entries);
void export_database_poses(const std::vector<DatabaseEntry>& entries, const std::filesystem::path& path);

}  // namespace egotraj
