#include "egotraj_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "egotraj/errors.hpp"

namespace egotraj::cli {

namespace {

using json = nlohmann::ordered_json;

struct Field {
  const char* section;
  const char* key;
  std::function<void(const json&, PipelineConfig&)> set;
  std::function<json(const PipelineConfig&)> get;
};

[[noreturn]] void type_error(const char* section, const char* key, const char* expected) {
  throw ConfigError(std::string("config key '") + section + "." + key + "' must be " + expected);
}

template <typename Get>
Field real(const char* section, const char* key, Get get) {
  Field f{section, key, {}, {}};
  f.set = [section, key, get](const json& v, PipelineConfig& c) {
    if (!v.is_number()) type_error(section, key, "a number");
    get(c) = v.get<double>();
  };
  f.get = [get](const PipelineConfig& c) { return json(get(c)); };
  return f;
}

template <typename Get>
Field integer(const char* section, const char* key, Get get) {
  Field f{section, key, {}, {}};
  f.set = [section, key, get](const json& v, PipelineConfig& c) {
    if (!v.is_number_integer()) type_error(section, key, "an integer");
    get(c) = v.get<std::int64_t>();
  };
  f.get = [get](const PipelineConfig& c) { return json(get(c)); };
  return f;
}

template <typename Get>
Field boolean(const char* section, const char* key, Get get) {
  Field f{section, key, {}, {}};
  f.set = [section, key, get](const json& v, PipelineConfig& c) {
    if (!v.is_boolean()) type_error(section, key, "a boolean");
    get(c) = v.get<bool>();
  };
  f.get = [get](const PipelineConfig& c) { return json(get(c)); };
  return f;
}

template <typename Parse, typename Format>
Field text(const char* section, const char* key, Parse parse, Format format) {
  Field f{section, key, {}, {}};
  f.set = [section, key, parse](const json& v, PipelineConfig& c) {
    if (!v.is_string()) type_error(section, key, "a string");
    try {
      parse(c, v.get<std::string>());
    } catch (const egotraj::Error& e) {
      throw ConfigError(std::string("config key '") + section + "." + key + "': " + e.what());
    }
  };
  f.get = [format](const PipelineConfig& c) { return json(format(c)); };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      integer("anchors", "min_inlier_count", [](auto& c) -> auto& { return c.filter.min_inlier_count; }),
      real("anchors", "min_inlier_ratio", [](auto& c) -> auto& { return c.filter.min_inlier_ratio; }),
      integer("anchors", "min_interval_frames",
              [](auto& c) -> auto& { return c.filter.min_interval_frames; }),

      text(
          "refine", "scale_mode",
          [](PipelineConfig& c, const std::string& s) { c.refine.scale_mode = parse_scale_mode(s); },
          [](const PipelineConfig& c) { return to_string(c.refine.scale_mode); }),
      text(
          "refine", "cut_locus",
          [](PipelineConfig& c, const std::string& s) { c.refine.cut_locus_policy = parse_cut_locus_policy(s); },
          [](const PipelineConfig& c) { return to_string(c.refine.cut_locus_policy); }),

      real("grid", "spacing_xy", [](auto& c) -> auto& { return c.grid.spacing_xy; }),
      real("grid", "spacing_z", [](auto& c) -> auto& { return c.grid.spacing_z; }),
      real("grid", "z_min", [](auto& c) -> auto& { return c.grid.z_min; }),
      real("grid", "z_max", [](auto& c) -> auto& { return c.grid.z_max; }),
      real("grid", "clearance", [](auto& c) -> auto& { return c.grid.clearance; }),
      real("grid", "pitch_min", [](auto& c) -> auto& { return c.grid.pitch_min; }),
      real("grid", "pitch_max", [](auto& c) -> auto& { return c.grid.pitch_max; }),
      integer("grid", "yaws_per_position", [](auto& c) -> auto& { return c.grid.yaws_per_position; }),

      real("metrics", "ground_z", [](auto& c) -> auto& { return c.metrics.ground_z; }),
      boolean("metrics", "estimate_ground", [](auto& c) -> auto& { return c.metrics.estimate_ground; }),
      real("metrics", "foot_height_threshold",
           [](auto& c) -> auto& { return c.metrics.foot_height_threshold; }),

      integer("simulation", "frames", [](auto& c) -> auto& { return c.simulation.frames; }),
      real("simulation", "fps", [](auto& c) -> auto& { return c.simulation.fps; }),
      text(
          "simulation", "style",
          [](PipelineConfig& c, const std::string& s) { c.simulation.path.style = parse_path_style(s); },
          [](const PipelineConfig& c) { return to_string(c.simulation.path.style); }),
      real("simulation", "speed", [](auto& c) -> auto& { return c.simulation.path.speed; }),
      real("simulation", "scale_drift",
           [](auto& c) -> auto& { return c.simulation.drift.scale_drift_per_frame; }),
      real("simulation", "rot_noise", [](auto& c) -> auto& { return c.simulation.drift.rot_noise_sigma; }),
      real("simulation", "trans_noise",
           [](auto& c) -> auto& { return c.simulation.drift.trans_noise_sigma; }),
      integer("simulation", "anchor_period",
              [](auto& c) -> auto& { return c.simulation.anchors.anchor_period; }),
      real("simulation", "outlier_fraction",
           [](auto& c) -> auto& { return c.simulation.anchors.outlier_fraction; }),
      real("simulation", "outlier_trans_range",
           [](auto& c) -> auto& { return c.simulation.anchors.outlier_trans_range; }),
      real("simulation", "anchor_trans_sigma",
           [](auto& c) -> auto& { return c.simulation.anchors.pose_trans_sigma; }),
      real("simulation", "anchor_rot_sigma",
           [](auto& c) -> auto& { return c.simulation.anchors.pose_rot_sigma; }),
  };
  return all;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (f.section && section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

void apply_config_json(const std::string& text, PipelineConfig& config, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError(source + ": top level must be a JSON object");
  }
  PipelineConfig updated = config;
  for (const auto& [name, value] : root.items()) {
    if (name == "seed") {
      if (value.is_null()) {
        updated.seed.reset();
      } else if (value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
        updated.seed = value.get<std::uint64_t>();
      } else {
        throw ConfigError(source + ": config key 'seed' must be a non-negative integer");
      }
      continue;
    }
    if (!value.is_object()) {
      throw ConfigError(source + ": unknown config key '" + name + "'");
    }
    bool known_section = false;
    for (const auto& f : fields()) known_section = known_section || (f.section && name == f.section);
    if (!known_section) {
      throw ConfigError(source + ": unknown config section '" + name + "'");
    }
    for (const auto& [key, v] : value.items()) {
      const Field* f = find_field(name, key);
      if (f == nullptr) {
        throw ConfigError(source + ": unknown config key '" + name + "." + key + "'");
      }
      f->set(v, updated);
    }
  }
  config = updated;
}

void load_config_file(const std::filesystem::path& path, PipelineConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_json(buf.str(), config, path.string());
}

void validate(const PipelineConfig& c) {
  try {
    egotraj::validate(c.filter);
    egotraj::validate(c.grid);
    egotraj::validate(c.metrics);
    egotraj::validate(c.simulation.drift);
    egotraj::validate(c.simulation.anchors);
    if (c.simulation.frames < 2) {
      throw InvalidArgumentError("driftsim", "simulation needs at least 2 frames");
    }
    if (!(c.simulation.fps > 0.0) || !std::isfinite(c.simulation.fps)) {
      throw InvalidArgumentError("driftsim", "simulation fps must be positive");
    }
    if (!(c.simulation.path.speed > 0.0) || !std::isfinite(c.simulation.path.speed)) {
      throw InvalidArgumentError("driftsim", "simulation speed must be positive");
    }
  } catch (const egotraj::Error& e) {
    throw ConfigError(e.module() + ": " + e.what());
  }
}

std::string config_to_json(const PipelineConfig& config) {
  json root;
  for (const auto& f : fields()) {
    root[f.section][f.key] = f.get(config);
  }
  root["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  return root.dump(2) + "\n";
}

void write_effective_config(const PipelineConfig& config, const std::filesystem::path& dir) {
  const auto path = (dir.empty() ? std::filesystem::path(".") : dir) / "effective_config.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cli", "cannot open " + path.string() + " for writing");
  }
  out << config_to_json(config);
  if (!out) {
    throw IoError("cli", "write failure on " + path.string());
  }
}

}  // namespace egotraj::cli
