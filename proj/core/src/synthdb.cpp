#include "egotraj/synthdb.hpp"

#include <cmath>

#include "egotraj/errors.hpp"
#include "egotraj/parallel.hpp"
#include "egotraj/rng.hpp"

namespace egotraj {

namespace {

constexpr double kGridEps = 1e-9;
constexpr std::int64_t kMaxGridNodes = std::int64_t{1} << 32;

std::int64_t axis_count(double extent, double spacing) {
  return static_cast<std::int64_t>(std::ceil(extent / spacing + 1.0 - kGridEps));
}

}  // namespace

void validate(const GridSamplerConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(c.spacing_xy) || !positive(c.spacing_z)) {
    throw InvalidArgumentError("synthdb", "grid spacings must be positive");
  }
  if (!positive(c.clearance)) {
    throw InvalidArgumentError("synthdb", "clearance must be positive");
  }
  if (!std::isfinite(c.z_min) || !std::isfinite(c.z_max) || c.z_min > c.z_max) {
    throw InvalidArgumentError("synthdb", "z range must satisfy z_min <= z_max");
  }
  const double half_pi = std::numbers::pi / 2.0;
  if (!(c.pitch_min > -half_pi) || !(c.pitch_max < half_pi) || c.pitch_min > c.pitch_max) {
    throw InvalidArgumentError("synthdb", "pitch range must lie inside (-pi/2, pi/2) with min <= max");
  }
  if (c.yaws_per_position < 1) {
    throw InvalidArgumentError("synthdb", "yaws_per_position must be at least 1");
  }
}

Vec3 SamplingGrid::position(const GridCell& c) const {
  return {origin.x() + static_cast<double>(c[0]) * spacing_xy, origin.y() + static_cast<double>(c[1]) * spacing_xy,
          origin.z() + static_cast<double>(c[2]) * spacing_z};
}

GridCell SamplingGrid::cell(std::int64_t linear) const {
  const std::int64_t iz = linear % nz;
  const std::int64_t rest = linear / nz;
  return {rest / ny, rest % ny, iz};
}

SamplingGrid make_sampling_grid(const PointCloud& cloud, const GridSamplerConfig& config) {
  validate(config);
  if (cloud.points.empty()) {
    throw InvalidArgumentError("synthdb", "point cloud is empty");
  }
  Vec3 lo = cloud.points.front();
  Vec3 hi = lo;
  for (const Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  SamplingGrid grid;
  grid.origin = {lo.x(), lo.y(), config.z_min};
  grid.spacing_xy = config.spacing_xy;
  grid.spacing_z = config.spacing_z;
  grid.nx = axis_count(hi.x() - lo.x(), config.spacing_xy);
  grid.ny = axis_count(hi.y() - lo.y(), config.spacing_xy);
  grid.nz = static_cast<std::int64_t>(std::floor((config.z_max - config.z_min) / config.spacing_z + kGridEps)) + 1;
  if (static_cast<double>(grid.nx) * static_cast<double>(grid.ny) * static_cast<double>(grid.nz) >
      static_cast<double>(kMaxGridNodes)) {
    throw InvalidArgumentError("synthdb", "sampling grid too large; increase the spacing");
  }
  return grid;
}

KdTree build_index(const PointCloud& cloud) { return KdTree(cloud.points); }

Rotation camera_orientation(double yaw, double pitch) {
  // Rz(yaw) * Ry(-pitch): positive pitch lifts the +x forward axis toward +z.
  return so3_exp(Vec3(0.0, 0.0, yaw)) * so3_exp(Vec3(0.0, -pitch, 0.0));
}

std::vector<DatabaseEntry> sample_camera_grid(const PointCloud& cloud, const KdTree& index,
                                              const GridSamplerConfig& config, std::size_t threads) {
  const SamplingGrid grid = make_sampling_grid(cloud, config);
  const auto nodes = static_cast<std::size_t>(grid.node_count());
  const auto yaws = static_cast<std::size_t>(config.yaws_per_position);

  std::vector<char> kept(nodes, 0);
  std::vector<double> pitches(nodes * yaws, 0.0);
  parallel_for(nodes, threads, [&](std::size_t i) {
    const GridCell cell = grid.cell(static_cast<std::int64_t>(i));
    if (index.nearest(grid.position(cell)).distance < config.clearance) {
      return;
    }
    kept[i] = 1;
    Rng rng(derive_seed(config.rng_seed, i));
    for (std::size_t j = 0; j < yaws; ++j) {
      pitches[i * yaws + j] = rng.uniform(config.pitch_min, config.pitch_max);
    }
  });

  std::vector<DatabaseEntry> out;
  std::int64_t next_id = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!kept[i]) continue;
    const GridCell cell = grid.cell(static_cast<std::int64_t>(i));
    const Vec3 position = grid.position(cell);
    for (std::size_t j = 0; j < yaws; ++j) {
      const double yaw = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(yaws);
      out.push_back({RigidPose{camera_orientation(yaw, pitches[i * yaws + j]), position}, cell, next_id++});
    }
  }
  return out;
}

Trajectory database_trajectory(const std::vector<DatabaseEntry>& entries) {
  Trajectory traj(1.0);
  for (const auto& e : entries) {
    traj.push_back(e.sample_id, e.pose);
  }
  return traj;
}

void export_database_poses(const std::vector<DatabaseEntry>& entries, const std::filesystem::path& path) {
  write_trajectory(database_trajectory(entries), path, "database");
}

}  // namespace egotraj
