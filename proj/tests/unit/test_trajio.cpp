#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "egotraj/errors.hpp"
#include "egotraj/trajio.hpp"
#include "oracles.hpp"

namespace egotraj {
namespace {

Trajectory random_trajectory(Rng& rng, std::size_t n) {
  Trajectory t(30.0);
  FrameIndex f = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f += 1 + rng.integer(0, 3);
    t.push_back(f, testing::random_pose(rng, 20.0));
  }
  return t;
}

std::string to_csv(const Trajectory& t) {
  std::ostringstream s;
  write_trajectory(t, s);
  return s.str();
}

void expect_same_pose(const RigidPose& a, const RigidPose& b) {
  EXPECT_EQ(a.translation, b.translation);
  EXPECT_EQ(a.rotation.w(), b.rotation.w());
  EXPECT_EQ(a.rotation.x(), b.rotation.x());
  EXPECT_EQ(a.rotation.y(), b.rotation.y());
  EXPECT_EQ(a.rotation.z(), b.rotation.z());
}

TEST(TrajioTest, FormatDoubleRoundTrips) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
}

TEST(TrajioTest, TrajectoryRoundTrip) {
  Rng rng(2);
  const Trajectory t = random_trajectory(rng, 100);
  std::istringstream in(to_csv(t));
  const Trajectory back = parse_trajectory(in);
  ASSERT_EQ(back.size(), t.size());
  EXPECT_EQ(back.fps(), t.fps());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back[i].frame, t[i].frame);
    expect_same_pose(back[i].pose, t[i].pose);
  }
  EXPECT_EQ(to_csv(back), to_csv(t));
}

TEST(TrajioTest, EmptyTrajectoryIsValid) {
  std::istringstream in("# format_version: 1\n# kind: trajectory\n# fps: 10\nframe,tx,ty,tz,qw,qx,qy,qz\n");
  const Trajectory t = parse_trajectory(in);
  EXPECT_TRUE(t.empty());
}

TEST(TrajioTest, DuplicateFrameNamesLine) {
  std::istringstream in(
      "# format_version: 1\n# kind: trajectory\n# fps: 10\nframe,tx,ty,tz,qw,qx,qy,qz\n"
      "4,0,0,0,1,0,0,0\n5,0,0,0,1,0,0,0\n5,1,0,0,1,0,0,0\n");
  try {
    parse_trajectory(in, "dup.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_EQ(e.source(), "dup.csv");
    EXPECT_NE(std::string(e.what()).find("duplicate frame index 5"), std::string::npos);
  }
}

TEST(TrajioTest, WorldToCameraIsInverted) {
  const RigidPose p{Rotation::about_axis(Vec3::UnitZ(), 0.5), Vec3(1, 2, 3)};
  const RigidPose inv = p.inverse();
  std::ostringstream s;
  s << "# format_version: 1\n# kind: trajectory\n# fps: 10\n# convention: world-to-camera\n"
    << "frame,tx,ty,tz,qw,qx,qy,qz\n0," << format_double(inv.translation.x()) << ','
    << format_double(inv.translation.y()) << ',' << format_double(inv.translation.z()) << ','
    << format_double(inv.rotation.w()) << ',' << format_double(inv.rotation.x()) << ','
    << format_double(inv.rotation.y()) << ',' << format_double(inv.rotation.z()) << '\n';
  std::istringstream in(s.str());
  const Trajectory t = parse_trajectory(in);
  EXPECT_LT((t[0].pose.translation - p.translation).norm(), 1e-12);
  EXPECT_LT(quaternion_distance(t[0].pose.rotation, p.rotation), 1e-12);
}

TEST(TrajioTest, MetadataErrors) {
  const std::string body = "frame,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n";
  for (const std::string header : {
           "# kind: trajectory\n# fps: 10\n",                                        // no version
           "# format_version: 2\n# kind: trajectory\n# fps: 10\n",                   // bad version
           "# format_version: 1\n# kind: motion\n# fps: 10\n",                       // wrong kind
           "# format_version: 1\n# kind: trajectory\n",                              // no fps
           "# format_version: 1\n# kind: trajectory\n# fps: -1\n",                   // bad fps
           "# format_version: 1\n# kind: trajectory\n# fps: 10\n# convention: up\n"  // bad convention
       }) {
    std::istringstream in(header + body);
    EXPECT_THROW(parse_trajectory(in), ParseError) << header;
  }
  std::istringstream db("# format_version: 1\n# kind: database\n# fps: 1\n" + body);
  EXPECT_NO_THROW(parse_trajectory(db));
}

TEST(TrajioTest, RowErrors) {
  const std::string head = "# format_version: 1\n# kind: trajectory\n# fps: 10\nframe,tx,ty,tz,qw,qx,qy,qz\n";
  for (const std::string row : {"0,0,0,0,1,0,0\n", "0,0,0,0,1,0,0,0,9\n", "a,0,0,0,1,0,0,0\n",
                                "-1,0,0,0,1,0,0,0\n", "0,nan,0,0,1,0,0,0\n", "0,0,0,0,0,0,0,0\n",
                                "0,1e999,0,0,1,0,0,0\n", "0,0x1,0,0,1,0,0,0\n"}) {
    std::istringstream in(head + row);
    try {
      parse_trajectory(in);
      ADD_FAILURE() << "accepted " << row;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 5u) << row;
    }
  }
  std::istringstream dec(head + "3,0,0,0,1,0,0,0\n2,0,0,0,1,0,0,0\n");
  EXPECT_THROW(parse_trajectory(dec), ParseError);
}

TEST(TrajioTest, TrajectoryInvariants) {
  EXPECT_THROW(Trajectory(0.0), InvariantError);
  Trajectory t(10.0);
  t.push_back(3, RigidPose{});
  EXPECT_THROW(t.push_back(3, RigidPose{}), InvariantError);
  EXPECT_THROW(t.push_back(1, RigidPose{}), InvariantError);
  EXPECT_THROW(t.pose_at(4), GapError);
  EXPECT_NO_THROW(t.pose_at(3));
  EXPECT_THROW(Trajectory(10.0, {{2, {}}, {1, {}}}), InvariantError);
}

TEST(TrajioTest, MissingFileIsIoError) {
  EXPECT_THROW(read_trajectory("/nonexistent/dir/x.csv"), IoError);
  EXPECT_THROW(write_trajectory(Trajectory(10.0), std::filesystem::path("/nonexistent/dir/x.csv")), IoError);
}

std::vector<AnchorCandidate> random_candidates(Rng& rng, std::size_t n) {
  std::vector<AnchorCandidate> out;
  FrameIndex f = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f += 1 + rng.integer(0, 50);
    out.push_back({f, testing::random_pose(rng, 10.0), rng.integer(0, 5000), rng.uniform()});
  }
  return out;
}

TEST(TrajioTest, AnchorRoundTrip) {
  Rng rng(3);
  const auto cands = random_candidates(rng, 50);
  std::ostringstream out;
  write_anchor_candidates(cands, out);
  std::istringstream in(out.str());
  const auto back = parse_anchor_candidates(in);
  ASSERT_EQ(back.size(), cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    EXPECT_EQ(back[i].frame, cands[i].frame);
    EXPECT_EQ(back[i].inlier_count, cands[i].inlier_count);
    EXPECT_EQ(back[i].inlier_ratio, cands[i].inlier_ratio);
    expect_same_pose(back[i].pose, cands[i].pose);
  }
}

TEST(TrajioTest, AnchorErrors) {
  const std::string head =
      "# format_version: 1\n# kind: anchors\nframe,tx,ty,tz,qw,qx,qy,qz,inlier_count,inlier_ratio\n";
  std::istringstream ratio(head + "0,0,0,0,1,0,0,0,600,1.2\n");
  EXPECT_THROW(parse_anchor_candidates(ratio), ParseError);
  std::istringstream count(head + "0,0,0,0,1,0,0,0,-3,0.5\n");
  EXPECT_THROW(parse_anchor_candidates(count), ParseError);
  std::istringstream missing("# format_version: 1\n# kind: anchors\nframe,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n");
  EXPECT_THROW(parse_anchor_candidates(missing), ParseError);

  std::vector<AnchorCandidate> bad = {{0, {}, 600, 1.5}};
  std::ostringstream sink;
  EXPECT_THROW(write_anchor_candidates(bad, sink), InvariantError);
}

TEST(TrajioTest, MotionRoundTrip) {
  Rng rng(4);
  MotionSequence m = testing::random_motion(rng, 80);
  m.layout.neck = 15;
  std::ostringstream out;
  write_motion(m, out);
  std::istringstream in(out.str());
  const MotionSequence back = parse_motion(in);
  ASSERT_EQ(back.frames.size(), 80u);
  EXPECT_EQ(back.layout, m.layout);
  EXPECT_EQ(back.fps, m.fps);
  for (std::size_t i = 0; i < 80; ++i) {
    EXPECT_EQ(back.frames[i].frame, m.frames[i].frame);
    for (std::size_t j = 0; j < kJointCount; ++j) EXPECT_EQ(back.frames[i].joints[j], m.frames[i].joints[j]);
  }
}

TEST(TrajioTest, MotionShapeErrors) {
  Rng rng(5);
  const MotionSequence m = testing::random_motion(rng, 2);
  std::ostringstream out;
  write_motion(m, out);
  std::string text = out.str();

  // Drop the last joint (three values) from the final row.
  std::string short_row = text;
  short_row.erase(short_row.find_last_of('\n'));
  for (int k = 0; k < 3; ++k) short_row.erase(short_row.find_last_of(','));
  short_row += '\n';
  std::istringstream in21(short_row);
  EXPECT_THROW(parse_motion(in21), InvariantError);

  std::string dup = text;
  dup.replace(dup.find("neck=12"), 7, "neck=0");
  std::istringstream in_dup(dup);
  EXPECT_THROW(parse_motion(in_dup), InvariantError);

  std::string joints = text;
  joints.replace(joints.find("# joints: 22"), 12, "# joints: 21");
  std::istringstream in_j(joints);
  EXPECT_THROW(parse_motion(in_j), InvariantError);

  JointLayout l;
  l.left_toe = 22;
  EXPECT_THROW(validate(l), InvariantError);
}

std::string cube_ascii() {
  std::string s = "ply\nformat ascii 1.0\ncomment unit cube\nelement vertex 8\nproperty float x\n"
                  "property float y\nproperty float z\nproperty uchar intensity\nend_header\n";
  for (int i = 0; i < 8; ++i) {
    s += std::to_string(i & 1) + " " + std::to_string((i >> 1) & 1) + " " + std::to_string((i >> 2) & 1) + " 7\n";
  }
  return s;
}

TEST(PlyTest, AsciiCube) {
  const PointCloud c = parse_pointcloud_ply(cube_ascii());
  ASSERT_EQ(c.points.size(), 8u);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(c.points[i], Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  }
  EXPECT_TRUE(c.colors.empty());
}

TEST(PlyTest, BinaryMatchesAscii) {
  const PointCloud ascii = parse_pointcloud_ply(cube_ascii());
  const PointCloud binary = parse_pointcloud_ply(encode_pointcloud_ply(ascii, PlyEncoding::kBinaryLittleEndian));
  EXPECT_EQ(binary.points, ascii.points);
  const PointCloud again = parse_pointcloud_ply(encode_pointcloud_ply(ascii, PlyEncoding::kAscii));
  EXPECT_EQ(again.points, ascii.points);
}

TEST(PlyTest, ColorsAndDoublesRoundTrip) {
  Rng rng(6);
  PointCloud c;
  for (int i = 0; i < 500; ++i) {
    c.points.push_back(testing::random_vector(rng, 100.0));
    c.colors.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i * 3), 9});
  }
  for (auto enc : {PlyEncoding::kAscii, PlyEncoding::kBinaryLittleEndian}) {
    const PointCloud back = parse_pointcloud_ply(encode_pointcloud_ply(c, enc));
    EXPECT_EQ(back.points, c.points);
    EXPECT_EQ(back.colors, c.colors);
  }
}

TEST(PlyTest, TruncatedBody) {
  std::string s = cube_ascii();
  s.replace(s.find("vertex 8"), 8, "vertex 10");
  EXPECT_THROW(parse_pointcloud_ply(s), ParseError);
  const std::string bin = encode_pointcloud_ply(parse_pointcloud_ply(cube_ascii()), PlyEncoding::kBinaryLittleEndian);
  EXPECT_THROW(parse_pointcloud_ply(bin.substr(0, bin.size() - 5)), ParseError);
}

TEST(PlyTest, HeaderErrors) {
  EXPECT_THROW(parse_pointcloud_ply("plx\n"), ParseError);
  EXPECT_THROW(parse_pointcloud_ply("ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n"), ParseError);
  EXPECT_THROW(parse_pointcloud_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty int x\nproperty int y\n"
                                    "property int z\nend_header\n1 2 3\n"),
               ParseError);
  EXPECT_THROW(parse_pointcloud_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"), ParseError);
  EXPECT_THROW(parse_pointcloud_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                                    "end_header\n1 2\n"),
               ParseError);
}

TEST(PlyTest, FileRoundTrip) {
  const auto dir = testing::temp_dir("ply");
  const PointCloud c = parse_pointcloud_ply(cube_ascii());
  write_pointcloud_ply(c, dir / "cube.ply");
  EXPECT_EQ(read_pointcloud_ply(dir / "cube.ply").points, c.points);
  EXPECT_THROW(read_pointcloud_ply(dir / "missing.ply"), IoError);
  std::filesystem::remove_all(dir);
}

// Byte-level mutations of valid fixtures: every outcome is either a parse or
// a typed library error, never a crash or a foreign exception.
std::string mutate(Rng& rng, std::string s) {
  const int edits = 1 + static_cast<int>(rng.integer(0, 3));
  static const char kAlphabet[] = "0123456789-+.,eE#: \nabcxyz\x00\xff";
  static const std::string alphabet(kAlphabet, sizeof(kAlphabet) - 1);
  for (int e = 0; e < edits && !s.empty(); ++e) {
    const auto pos = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(s.size()) - 1));
    switch (rng.integer(0, 3)) {
      case 0:
        s[pos] = alphabet[static_cast<std::size_t>(rng.integer(0, alphabet.size() - 1))];
        break;
      case 1:
        s.erase(pos, static_cast<std::size_t>(rng.integer(1, 12)));
        break;
      case 2:
        s.insert(pos, 1, alphabet[static_cast<std::size_t>(rng.integer(0, alphabet.size() - 1))]);
        break;
      default:
        s.resize(pos);
        break;
    }
  }
  return s;
}

template <typename Fn>
void fuzz(const std::string& fixture, std::uint64_t seed, int rounds, Fn&& parse) {
  Rng rng(seed);
  for (int i = 0; i < rounds; ++i) {
    const std::string input = mutate(rng, fixture);
    try {
      parse(input);
    } catch (const ParseError& e) {
      EXPECT_FALSE(e.source().empty());
    } catch (const Error&) {
    } catch (const std::exception& e) {
      ADD_FAILURE() << "foreign exception " << e.what() << " on input:\n" << input;
    }
  }
}

TEST(FuzzTest, MutatedFixturesRaiseTypedErrors) {
  Rng rng(7);
  const std::string traj = to_csv(random_trajectory(rng, 6));
  std::ostringstream anchors;
  write_anchor_candidates(random_candidates(rng, 6), anchors);
  std::ostringstream motion;
  write_motion(testing::random_motion(rng, 2), motion);
  const std::string ply_ascii = cube_ascii();
  const std::string ply_bin =
      encode_pointcloud_ply(parse_pointcloud_ply(ply_ascii), PlyEncoding::kBinaryLittleEndian);

  fuzz(traj, 100, 2500, [](const std::string& s) {
    std::istringstream in(s);
    parse_trajectory(in, "fuzz.csv");
  });
  fuzz(anchors.str(), 101, 2500, [](const std::string& s) {
    std::istringstream in(s);
    parse_anchor_candidates(in, "fuzz.csv");
  });
  fuzz(motion.str(), 102, 1000, [](const std::string& s) {
    std::istringstream in(s);
    parse_motion(in, "fuzz.csv");
  });
  fuzz(ply_ascii, 103, 2000, [](const std::string& s) { parse_pointcloud_ply(s, "fuzz.ply"); });
  fuzz(ply_bin, 104, 2000, [](const std::string& s) { parse_pointcloud_ply(s, "fuzz.ply"); });
}

}  // namespace
}  // namespace egotraj
