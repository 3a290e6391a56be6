// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mimonerf/objectives.hpp"

namespace mimonerf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

}  // namespace

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError("config: expected a boolean, got '" + value + "'");
}

Vec3d parse_background(const std::string& value) {
  if (value == "white") return Vec3d::Ones();
  if (value == "black") return Vec3d::Zero();
  if (value == "gray") return Vec3d(0.5, 0.5, 0.5);
  std::stringstream ss(value);
  std::string item;
  Vec3d out;
  int i = 0;
  while (std::getline(ss, item, ',') && i < 3) out[i++] = parse_real("background", trim(item));
  if (i != 3) throw UsageError("config: background expects white|black|gray or r,g,b");
  for (int c = 0; c < 3; ++c)
    if (out[c] < 0.0 || out[c] > 1.0) throw UsageError("config: background channels must be in [0,1]");
  return out;
}

TrainConfig default_config() { return TrainConfig{}; }

void set_config_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scene") cfg.scene = value;
  else if (key == "views") cfg.views = static_cast<int>(parse_int(key, value));
  else if (key == "resolution") cfg.resolution = static_cast<int>(parse_int(key, value));
  else if (key == "n_coarse") cfg.n_coarse = static_cast<int>(parse_int(key, value));
  else if (key == "n_fine") cfg.n_fine = static_cast<int>(parse_int(key, value));
  else if (key == "n_p") cfg.n_p = static_cast<int>(parse_int(key, value));
  else if (key == "preset") cfg.preset = value;
  else if (key == "lambda") cfg.lambda = parse_real(key, value);
  else if (key == "lr") cfg.lr = parse_real(key, value);
  else if (key == "iters") cfg.iters = parse_int(key, value);
  else if (key == "batch_rays") cfg.batch_rays = static_cast<int>(parse_int(key, value));
  else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "jitter") cfg.jitter = parse_bool(value);
  else if (key == "grouping") cfg.grouping = value;
  else if (key == "variant") cfg.variant = value;
  else if (key == "teacher") cfg.teacher = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "background") cfg.background = value;
  else if (key == "camera_mode") cfg.camera_mode = value;
  else if (key == "width") cfg.width = static_cast<int>(parse_int(key, value));
  else if (key == "depth") cfg.depth = static_cast<int>(parse_int(key, value));
  else if (key == "pos_freqs") cfg.pos_freqs = static_cast<int>(parse_int(key, value));
  else if (key == "dir_freqs") cfg.dir_freqs = static_cast<int>(parse_int(key, value));
  else throw UsageError("config: unknown key '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig cfg = default_config();
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    set_config_key(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "scene=" << cfg.scene << "\n";
  out << "views=" << cfg.views << "\n";
  out << "resolution=" << cfg.resolution << "\n";
  out << "n_coarse=" << cfg.n_coarse << "\n";
  out << "n_fine=" << cfg.n_fine << "\n";
  out << "n_p=" << cfg.n_p << "\n";
  out << "preset=" << cfg.preset << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", cfg.lambda);
  out << "lambda=" << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", cfg.lr);
  out << "lr=" << buf << "\n";
  out << "iters=" << cfg.iters << "\n";
  out << "batch_rays=" << cfg.batch_rays << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "jitter=" << (cfg.jitter ? "true" : "false") << "\n";
  out << "grouping=" << cfg.grouping << "\n";
  out << "variant=" << cfg.variant << "\n";
  out << "teacher=" << cfg.teacher << "\n";
  out << "out_dir=" << cfg.out_dir << "\n";
  out << "background=" << cfg.background << "\n";
  out << "camera_mode=" << cfg.camera_mode << "\n";
  out << "width=" << cfg.width << "\n";
  out << "depth=" << cfg.depth << "\n";
  out << "pos_freqs=" << cfg.pos_freqs << "\n";
  out << "dir_freqs=" << cfg.dir_freqs << "\n";
  return out.str();
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.n_p < 1) throw UsageError("config: n_p must be >= 1");
  if (cfg.n_coarse < 1 || cfg.n_coarse % cfg.n_p != 0)
    throw UsageError("config: n_coarse must be a positive multiple of n_p");
  if (cfg.n_fine < 0 || cfg.n_fine % cfg.n_p != 0)
    throw UsageError("config: n_fine must be a multiple of n_p");
  if (cfg.batch_rays < 1) throw UsageError("config: batch_rays must be >= 1");
  if (cfg.iters < 0) throw UsageError("config: iters must be >= 0");
  if (cfg.lr <= 0.0) throw UsageError("config: lr must be > 0");
  if (cfg.lambda < 0.0) throw UsageError("config: lambda must be >= 0");
  if (cfg.width < 2) throw UsageError("config: width must be >= 2");
  if (cfg.depth < 1) throw UsageError("config: depth must be >= 1");
  if (cfg.pos_freqs < 0 || cfg.dir_freqs < 0)
    throw UsageError("config: frequency counts must be >= 0");
  if (cfg.grouping != "neighbor" && cfg.grouping != "random")
    throw UsageError("config: grouping must be neighbor or random");
  if (cfg.camera_mode != "orbit" && cfg.camera_mode != "forward")
    throw UsageError("config: camera_mode must be orbit or forward");
  if (cfg.variant != "naive" && cfg.variant != "self" && cfg.variant != "distill")
    throw UsageError("config: variant must be naive, self or distill");
  if (cfg.variant == "distill" && cfg.teacher.empty())
    throw UsageError("config: variant=distill requires a teacher checkpoint");
  parse_background(cfg.background);
  if (cfg.variant == "self") {
    // Fails fast on incompatible (preset, n_p) pairs.
    if (cfg.preset.size() == 2 && cfg.preset[0] == 'R' && cfg.preset[1] >= '1' &&
        cfg.preset[1] <= '6')
      make_preset(cfg.preset, cfg.n_p, cfg.lambda);
    else
      parse_reformulations(cfg.preset, cfg.n_p, cfg.lambda);
  }
}

}  // namespace mimonerf
