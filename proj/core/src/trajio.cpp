#include "egotraj/trajio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "egotraj/errors.hpp"

namespace egotraj {

namespace {

constexpr std::string_view kPoseColumns = "frame,tx,ty,tz,qw,qx,qy,qz";
constexpr std::string_view kAnchorColumns = "frame,tx,ty,tz,qw,qx,qy,qz,inlier_count,inlier_ratio";

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvDocument {
  std::string source;
  std::map<std::string, std::pair<std::string, std::size_t>> meta;
  std::string header;
  std::size_t header_line = 0;
  std::vector<CsvRow> rows;

  [[noreturn]] void fail(std::size_t line, const std::string& what) const { throw ParseError(source, line, what); }

  const std::string* meta_value(const std::string& key) const {
    auto it = meta.find(key);
    return it == meta.end() ? nullptr : &it->second.first;
  }
  std::size_t meta_line(const std::string& key) const {
    auto it = meta.find(key);
    return it == meta.end() ? 0 : it->second.second;
  }
};

CsvDocument read_csv(std::istream& in, const std::string& source) {
  CsvDocument doc;
  doc.source = source;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const std::size_t colon = body.find(':');
      if (colon == std::string_view::npos) continue;  // free-form comment
      std::string key(trim(body.substr(0, colon)));
      std::string value(trim(body.substr(colon + 1)));
      if (doc.header_line != 0) {
        doc.fail(line_no, "metadata line after the column header");
      }
      if (doc.meta.count(key) != 0) {
        doc.fail(line_no, "duplicate metadata key '" + key + "'");
      }
      doc.meta.emplace(std::move(key), std::make_pair(std::move(value), line_no));
      continue;
    }
    if (doc.header_line == 0) {
      std::string header;
      for (auto f : split(line, ',')) {
        if (!header.empty()) header += ',';
        header += f;
      }
      doc.header = std::move(header);
      doc.header_line = line_no;
      continue;
    }
    CsvRow row;
    row.line = line_no;
    for (auto f : split(line, ',')) row.fields.emplace_back(f);
    doc.rows.push_back(std::move(row));
  }
  if (in.bad()) {
    throw IoError("trajio", "read failure on " + source);
  }
  if (doc.header_line == 0) {
    doc.fail(0, "missing column header line");
  }
  return doc;
}

double parse_real(const CsvDocument& doc, std::size_t line, std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    doc.fail(line, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) {
    doc.fail(line, "non-finite " + std::string(what));
  }
  return v;
}

std::int64_t parse_int(const CsvDocument& doc, std::size_t line, std::string_view text, std::string_view what) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    doc.fail(line, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

void check_version(const CsvDocument& doc, std::string_view kind) {
  const std::string* version = doc.meta_value("format_version");
  if (version == nullptr) {
    doc.fail(0, "missing 'format_version' metadata");
  }
  if (parse_int(doc, doc.meta_line("format_version"), *version, "format_version") != kFormatVersion) {
    doc.fail(doc.meta_line("format_version"), "unsupported format_version " + *version);
  }
  if (const std::string* k = doc.meta_value("kind"); k != nullptr && !kind.empty()) {
    // Database pose exports reuse the trajectory layout.
    const bool pose_file = kind == "trajectory" && (*k == "trajectory" || *k == "database");
    if (*k != kind && !pose_file) {
      doc.fail(doc.meta_line("kind"), "expected kind '" + std::string(kind) + "', found '" + *k + "'");
    }
  }
}

double read_fps(const CsvDocument& doc, bool required) {
  const std::string* fps_text = doc.meta_value("fps");
  if (fps_text == nullptr) {
    if (required) doc.fail(0, "missing 'fps' metadata");
    return 10.0;
  }
  const double fps = parse_real(doc, doc.meta_line("fps"), *fps_text, "fps");
  if (fps <= 0.0) {
    doc.fail(doc.meta_line("fps"), "fps must be positive");
  }
  return fps;
}

PoseConvention read_convention(const CsvDocument& doc) {
  const std::string* c = doc.meta_value("convention");
  if (c == nullptr || *c == "camera-to-world") return PoseConvention::kCameraToWorld;
  if (*c == "world-to-camera") return PoseConvention::kWorldToCamera;
  doc.fail(doc.meta_line("convention"), "unknown convention '" + *c + "'");
}

RigidPose parse_pose(const CsvDocument& doc, const CsvRow& row, PoseConvention convention) {
  const auto& f = row.fields;
  const Vec3 t(parse_real(doc, row.line, f[1], "tx"), parse_real(doc, row.line, f[2], "ty"),
               parse_real(doc, row.line, f[3], "tz"));
  const double qw = parse_real(doc, row.line, f[4], "qw");
  const double qx = parse_real(doc, row.line, f[5], "qx");
  const double qy = parse_real(doc, row.line, f[6], "qy");
  const double qz = parse_real(doc, row.line, f[7], "qz");
  const double n2 = qw * qw + qx * qx + qy * qy + qz * qz;
  if (!std::isfinite(n2) || n2 < 1e-12) {
    doc.fail(row.line, "quaternion has zero norm");
  }
  RigidPose pose{Rotation(qw, qx, qy, qz), t};
  if (convention == PoseConvention::kWorldToCamera) {
    pose = pose.inverse();
  }
  return pose;
}

FrameIndex parse_frame(const CsvDocument& doc, const CsvRow& row, std::optional<FrameIndex> previous) {
  const FrameIndex frame = parse_int(doc, row.line, row.fields[0], "frame index");
  if (frame < 0) {
    doc.fail(row.line, "negative frame index " + std::to_string(frame));
  }
  if (previous && frame == *previous) {
    doc.fail(row.line, "duplicate frame index " + std::to_string(frame));
  }
  if (previous && frame < *previous) {
    doc.fail(row.line, "frame index " + std::to_string(frame) + " decreases (previous " +
                           std::to_string(*previous) + ")");
  }
  return frame;
}

void expect_header(const CsvDocument& doc, std::string_view expected) {
  if (doc.header != expected) {
    doc.fail(doc.header_line, "unexpected columns '" + doc.header + "', expected '" + std::string(expected) + "'");
  }
}

void expect_fields(const CsvDocument& doc, const CsvRow& row, std::size_t n) {
  if (row.fields.size() != n) {
    doc.fail(row.line, "expected " + std::to_string(n) + " columns, found " + std::to_string(row.fields.size()));
  }
}

void write_pose_fields(std::ostream& out, FrameIndex frame, const RigidPose& p) {
  const auto& q = p.rotation;
  out << frame << ',' << format_double(p.translation.x()) << ',' << format_double(p.translation.y()) << ','
      << format_double(p.translation.z()) << ',' << format_double(q.w()) << ',' << format_double(q.x()) << ','
      << format_double(q.y()) << ',' << format_double(q.z());
}

template <typename Fn>
auto with_input_file(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("trajio", "cannot open " + path.string() + " for reading");
  }
  return fn(in, path.string());
}

template <typename Fn>
void with_output_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("trajio", "cannot open " + path.string() + " for writing");
  }
  fn(out);
  out.flush();
  if (!out) {
    throw IoError("trajio", "write failure on " + path.string());
  }
}

std::string layout_string(const JointLayout& l) {
  std::ostringstream s;
  s << "root=" << l.root << ",neck=" << l.neck << ",left_foot=" << l.left_foot << ",right_foot=" << l.right_foot
    << ",left_toe=" << l.left_toe << ",right_toe=" << l.right_toe;
  return s.str();
}

std::string motion_header() {
  std::string h = "frame";
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const std::string p = ",j" + std::to_string(j) + "_";
    h += p + "x" + p + "y" + p + "z";
  }
  return h;
}

}  // namespace

// --- Trajectory --------------------------------------------------------------

Trajectory::Trajectory(double fps) : fps_(fps) {
  if (!std::isfinite(fps) || fps <= 0.0) {
    throw InvariantError("trajio", "trajectory fps must be positive");
  }
}

Trajectory::Trajectory(double fps, std::vector<TrajectoryFrame> frames) : Trajectory(fps) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].frame < 0) {
      throw InvariantError("trajio", "negative frame index " + std::to_string(frames[i].frame));
    }
    if (i > 0 && frames[i].frame <= frames[i - 1].frame) {
      throw InvariantError("trajio", "frame " + std::to_string(frames[i].frame) +
                                         " does not increase after frame " + std::to_string(frames[i - 1].frame));
    }
  }
  frames_ = std::move(frames);
}

void Trajectory::push_back(FrameIndex frame, const RigidPose& pose) {
  if (frame < 0) {
    throw InvariantError("trajio", "negative frame index " + std::to_string(frame));
  }
  if (!frames_.empty() && frame <= frames_.back().frame) {
    throw InvariantError("trajio", "frame " + std::to_string(frame) + " does not increase after frame " +
                                       std::to_string(frames_.back().frame));
  }
  frames_.push_back({frame, pose});
}

std::optional<std::size_t> Trajectory::find(FrameIndex frame) const {
  auto it = std::lower_bound(frames_.begin(), frames_.end(), frame,
                             [](const TrajectoryFrame& f, FrameIndex v) { return f.frame < v; });
  if (it == frames_.end() || it->frame != frame) return std::nullopt;
  return static_cast<std::size_t>(it - frames_.begin());
}

const RigidPose& Trajectory::pose_at(FrameIndex frame) const {
  auto idx = find(frame);
  if (!idx) {
    throw GapError("trajio", "trajectory has no pose for frame " + std::to_string(frame));
  }
  return frames_[*idx].pose;
}

void validate(const AnchorCandidate& c) {
  if (c.frame < 0) {
    throw InvariantError("trajio", "anchor candidate has negative frame index " + std::to_string(c.frame));
  }
  if (c.inlier_count < 0) {
    throw InvariantError("trajio", "anchor candidate at frame " + std::to_string(c.frame) +
                                       " has negative inlier_count");
  }
  if (!(c.inlier_ratio >= 0.0 && c.inlier_ratio <= 1.0)) {
    throw InvariantError("trajio", "anchor candidate at frame " + std::to_string(c.frame) +
                                       " has inlier_ratio outside [0,1]: " + format_double(c.inlier_ratio));
  }
}

void validate(const JointLayout& layout) {
  const std::array<int, 6> idx = {layout.root,       layout.neck,     layout.left_foot,
                                  layout.right_foot, layout.left_toe, layout.right_toe};
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= static_cast<int>(kJointCount)) {
      throw InvariantError("trajio", "joint layout index " + std::to_string(idx[i]) + " out of range [0,22)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (idx[i] == idx[j]) {
        throw InvariantError("trajio", "joint layout index " + std::to_string(idx[i]) + " used twice");
      }
    }
  }
}

void validate(const MotionSequence& motion) {
  if (!std::isfinite(motion.fps) || motion.fps <= 0.0) {
    throw InvariantError("trajio", "motion fps must be positive");
  }
  validate(motion.layout);
  for (std::size_t i = 0; i < motion.frames.size(); ++i) {
    const auto& f = motion.frames[i];
    if (f.frame < 0 || (i > 0 && f.frame <= motion.frames[i - 1].frame)) {
      throw InvariantError("trajio", "motion frame " + std::to_string(f.frame) + " is not strictly increasing");
    }
    for (const Vec3& p : f.joints) {
      if (!p.allFinite()) {
        throw InvariantError("trajio", "motion frame " + std::to_string(f.frame) + " has non-finite joints");
      }
    }
  }
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

// --- trajectory I/O ----------------------------------------------------------

Trajectory parse_trajectory(std::istream& in, const std::string& source) {
  const CsvDocument doc = read_csv(in, source);
  check_version(doc, "trajectory");
  const double fps = read_fps(doc, true);
  const PoseConvention convention = read_convention(doc);
  expect_header(doc, kPoseColumns);

  std::vector<TrajectoryFrame> frames;
  frames.reserve(doc.rows.size());
  std::optional<FrameIndex> previous;
  for (const CsvRow& row : doc.rows) {
    expect_fields(doc, row, 8);
    const FrameIndex frame = parse_frame(doc, row, previous);
    frames.push_back({frame, parse_pose(doc, row, convention)});
    previous = frame;
  }
  return Trajectory(fps, std::move(frames));
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  return with_input_file(path, [](std::istream& in, const std::string& src) { return parse_trajectory(in, src); });
}

void write_trajectory(const Trajectory& traj, std::ostream& out, std::string_view kind) {
  out << "# format_version: " << kFormatVersion << '\n'
      << "# kind: " << kind << '\n'
      << "# fps: " << format_double(traj.fps()) << '\n'
      << "# convention: camera-to-world\n"
      << kPoseColumns << '\n';
  for (const auto& f : traj.frames()) {
    write_pose_fields(out, f.frame, f.pose);
    out << '\n';
  }
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path, std::string_view kind) {
  with_output_file(path, [&](std::ostream& out) { write_trajectory(traj, out, kind); });
}

// --- anchor candidates I/O ----------------------------------------------------

std::vector<AnchorCandidate> parse_anchor_candidates(std::istream& in, const std::string& source) {
  const CsvDocument doc = read_csv(in, source);
  check_version(doc, "anchors");
  const PoseConvention convention = read_convention(doc);
  expect_header(doc, kAnchorColumns);

  std::vector<AnchorCandidate> out;
  out.reserve(doc.rows.size());
  std::optional<FrameIndex> previous;
  for (const CsvRow& row : doc.rows) {
    expect_fields(doc, row, 10);
    AnchorCandidate c;
    c.frame = parse_frame(doc, row, previous);
    c.pose = parse_pose(doc, row, convention);
    c.inlier_count = parse_int(doc, row.line, row.fields[8], "inlier_count");
    c.inlier_ratio = parse_real(doc, row.line, row.fields[9], "inlier_ratio");
    if (c.inlier_count < 0) {
      doc.fail(row.line, "inlier_count must be non-negative");
    }
    if (c.inlier_ratio < 0.0 || c.inlier_ratio > 1.0) {
      doc.fail(row.line, "inlier_ratio " + format_double(c.inlier_ratio) + " outside [0,1]");
    }
    previous = c.frame;
    out.push_back(c);
  }
  return out;
}

std::vector<AnchorCandidate> read_anchor_candidates(const std::filesystem::path& path) {
  return with_input_file(path,
                         [](std::istream& in, const std::string& src) { return parse_anchor_candidates(in, src); });
}

void write_anchor_candidates(const std::vector<AnchorCandidate>& candidates, std::ostream& out) {
  out << "# format_version: " << kFormatVersion << '\n'
      << "# kind: anchors\n"
      << "# convention: camera-to-world\n"
      << kAnchorColumns << '\n';
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    validate(c);
    if (i > 0 && c.frame <= candidates[i - 1].frame) {
      throw InvariantError("trajio", "anchor candidate frame " + std::to_string(c.frame) + " is not increasing");
    }
    write_pose_fields(out, c.frame, c.pose);
    out << ',' << c.inlier_count << ',' << format_double(c.inlier_ratio) << '\n';
  }
}

void write_anchor_candidates(const std::vector<AnchorCandidate>& candidates, const std::filesystem::path& path) {
  with_output_file(path, [&](std::ostream& out) { write_anchor_candidates(candidates, out); });
}

// --- motion I/O ----------------------------------------------------------------

MotionSequence parse_motion(std::istream& in, const std::string& source) {
  const CsvDocument doc = read_csv(in, source);
  check_version(doc, "motion");
  MotionSequence motion;
  motion.fps = read_fps(doc, true);

  if (const std::string* joints = doc.meta_value("joints")) {
    const auto n = parse_int(doc, doc.meta_line("joints"), *joints, "joints");
    if (n != static_cast<std::int64_t>(kJointCount)) {
      throw InvariantError("trajio", source + ":" + std::to_string(doc.meta_line("joints")) + ": motion has " +
                                         std::to_string(n) + " joints, expected 22");
    }
  }

  if (const std::string* layout = doc.meta_value("layout")) {
    const std::size_t line = doc.meta_line("layout");
    JointLayout l;
    std::map<std::string, int*> slots = {{"root", &l.root},           {"neck", &l.neck},
                                         {"left_foot", &l.left_foot}, {"right_foot", &l.right_foot},
                                         {"left_toe", &l.left_toe},   {"right_toe", &l.right_toe}};
    for (auto item : split(*layout, ',')) {
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) doc.fail(line, "malformed layout entry '" + std::string(item) + "'");
      const std::string key(trim(item.substr(0, eq)));
      auto it = slots.find(key);
      if (it == slots.end()) doc.fail(line, "unknown layout joint '" + key + "'");
      const auto v = parse_int(doc, line, trim(item.substr(eq + 1)), "layout index");
      if (v < -1000000 || v > 1000000) doc.fail(line, "layout index out of range");
      *it->second = static_cast<int>(v);
    }
    try {
      validate(l);
    } catch (const InvariantError& e) {
      throw InvariantError("trajio", source + ":" + std::to_string(line) + ": " + e.what());
    }
    motion.layout = l;
  }

  static const std::string expected = motion_header();
  expect_header(doc, expected);

  std::optional<FrameIndex> previous;
  for (const CsvRow& row : doc.rows) {
    const std::size_t values = row.fields.size() - 1;
    if (values != 3 * kJointCount) {
      if (row.fields.size() > 1 && values % 3 == 0) {
        throw InvariantError("trajio", source + ":" + std::to_string(row.line) + ": frame has " +
                                           std::to_string(values / 3) + " joints, expected 22");
      }
      expect_fields(doc, row, 1 + 3 * kJointCount);
    }
    MotionFrame f;
    f.frame = parse_frame(doc, row, previous);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      f.joints[j] = Vec3(parse_real(doc, row.line, row.fields[1 + 3 * j], "joint x"),
                         parse_real(doc, row.line, row.fields[2 + 3 * j], "joint y"),
                         parse_real(doc, row.line, row.fields[3 + 3 * j], "joint z"));
    }
    previous = f.frame;
    motion.frames.push_back(f);
  }
  return motion;
}

MotionSequence read_motion(const std::filesystem::path& path) {
  return with_input_file(path, [](std::istream& in, const std::string& src) { return parse_motion(in, src); });
}

void write_motion(const MotionSequence& motion, std::ostream& out) {
  validate(motion);
  out << "# format_version: " << kFormatVersion << '\n'
      << "# kind: motion\n"
      << "# fps: " << format_double(motion.fps) << '\n'
      << "# joints: " << kJointCount << '\n'
      << "# layout: " << layout_string(motion.layout) << '\n'
      << motion_header() << '\n';
  for (const auto& f : motion.frames) {
    out << f.frame;
    for (const Vec3& p : f.joints) {
      out << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z());
    }
    out << '\n';
  }
}

void write_motion(const MotionSequence& motion, const std::filesystem::path& path) {
  with_output_file(path, [&](std::ostream& out) { write_motion(motion, out); });
}

}  // namespace egotraj
