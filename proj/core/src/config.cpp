#include "psindy/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "psindy/csv.hpp"
#include "psindy/errors.hpp"

namespace psindy {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  return out;
}

std::optional<double> to_real(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}", lineno), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}", lineno), "empty key");
    if (!cfg.values_.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }
  return cfg;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  }
  return out;
}

std::string KeyValueConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "missing required field");
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double KeyValueConfig::real(const std::string& key) const {
  const std::string s = text(key);
  auto v = to_real(s);
  if (!v || !std::isfinite(*v)) throw ConfigError(key, fmt::format("expected a number, got '{}'", s));
  return *v;
}

double KeyValueConfig::real_or(const std::string& key, double fallback) const {
  return has(key) ? real(key) : fallback;
}

long long KeyValueConfig::integer(const std::string& key) const {
  const std::string s = text(key);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key, fmt::format("expected an integer, got '{}'", s));
  }
  return v;
}

long long KeyValueConfig::integer_or(const std::string& key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool KeyValueConfig::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = text(key);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError(key, fmt::format("expected true or false, got '{}'", s));
}

std::vector<double> KeyValueConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& cell : split_list(text(key), ',')) {
    auto v = to_real(cell);
    if (!v || !std::isfinite(*v)) throw ConfigError(key, fmt::format("expected a number, got '{}'", cell));
    out.push_back(*v);
  }
  return out;
}

std::vector<std::pair<double, double>> KeyValueConfig::ranges(const std::string& key) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& cell : split_list(text(key), ',')) {
    const auto parts = split_list(cell, ':');
    std::optional<double> lo, hi;
    if (parts.size() == 2) {
      lo = to_real(parts[0]);
      hi = to_real(parts[1]);
    }
    if (!lo || !hi) throw ConfigError(key, fmt::format("expected 'lo:hi', got '{}'", cell));
    if (!(*hi > *lo)) throw ConfigError(key, fmt::format("empty range '{}'", cell));
    out.emplace_back(*lo, *hi);
  }
  return out;
}

void KeyValueConfig::reject_unused() const {
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) throw ConfigError(k, "unknown field");
  }
}

namespace {

std::size_t count_field(const KeyValueConfig& kv, const std::string& key, long long fallback,
                        long long min_value) {
  const long long v = kv.integer_or(key, fallback);
  if (v < min_value) throw ConfigError(key, fmt::format("must be >= {}", min_value));
  return static_cast<std::size_t>(v);
}

double positive_field(const KeyValueConfig& kv, const std::string& key, double fallback) {
  const double v = kv.real_or(key, fallback);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

std::vector<std::pair<double, double>> box_field(const KeyValueConfig& kv, const std::string& key,
                                                 std::size_t dim) {
  auto box = kv.ranges(key);
  if (box.size() == 1 && dim > 1) box.assign(dim, box.front());
  if (box.size() != dim) {
    throw ConfigError(key, fmt::format("expected {} ranges, got {}", dim, box.size()));
  }
  return box;
}

SectionSpec parse_section(const KeyValueConfig& kv, const OdeSystem& sys) {
  const std::string kind = kv.text_or("section.kind", "strobe");
  SectionSpec spec;
  if (kind == "strobe") {
    StrobeSection s;
    if (kv.has("section.period")) {
      s.period = positive_field(kv, "section.period", 1.0);
    } else if (sys.forcing_period) {
      s.period = *sys.forcing_period;
    } else {
      throw ConfigError("section.period", "missing required field (system is autonomous)");
    }
    s.phase = kv.real_or("section.phase", 0.0);
    spec = s;
  } else if (kind == "hyperplane") {
    HyperplaneSection h;
    const auto normal = kv.reals("section.normal");
    h.normal = Eigen::Map<const Vector>(normal.data(), static_cast<Eigen::Index>(normal.size()));
    h.offset = kv.real_or("section.offset", 0.0);
    const std::string dir = kv.text_or("section.direction", "increasing");
    if (dir == "increasing" || dir == "+1" || dir == "1") {
      h.direction = CrossingDirection::kIncreasing;
    } else if (dir == "decreasing" || dir == "-1") {
      h.direction = CrossingDirection::kDecreasing;
    } else if (dir == "both" || dir == "0") {
      h.direction = CrossingDirection::kBoth;
    } else {
      throw ConfigError("section.direction", fmt::format("unknown direction '{}'", dir));
    }
    for (double r : kv.reals("section.record")) {
      if (r < 0.0 || r != std::floor(r)) throw ConfigError("section.record", "indices must be nonnegative integers");
      h.record_indices.push_back(static_cast<std::size_t>(r));
    }
    if (kv.has("section.guard")) {
      h.guard_index = count_field(kv, "section.guard", 0, 0);
    }
    spec = h;
  } else {
    throw ConfigError("section.kind", fmt::format("expected 'strobe' or 'hyperplane', got '{}'", kind));
  }
  try {
    validate_section(spec, sys.dimension);
  } catch (const InvalidArgument& e) {
    throw ConfigError("section", e.what());
  }
  return spec;
}

PdeConfig parse_pde(const KeyValueConfig& kv) {
  PdeConfig p;
  p.nx = count_field(kv, "pde.nx", 64, 3);
  p.ny = count_field(kv, "pde.ny", static_cast<long long>(p.nx), 3);
  p.lx = positive_field(kv, "pde.lx", 10.0);
  p.ly = positive_field(kv, "pde.ly", p.lx);
  p.params.diffusion = kv.real_or("pde.diffusion", 0.1);
  if (p.params.diffusion < 0.0) throw ConfigError("pde.diffusion", "must be nonnegative");
  p.params.beta = kv.real_or("pde.beta", 1.0);
  if (p.params.beta < 0.0) throw ConfigError("pde.beta", "must be nonnegative");
  p.params.literal_form = kv.boolean_or("pde.literal_form", false);
  p.dt = positive_field(kv, "pde.dt", 0.05);
  p.t_end = positive_field(kv, "pde.t_end", 20.0);
  p.spinup = kv.real_or("pde.spinup", 0.0);
  if (p.spinup < 0.0) throw ConfigError("pde.spinup", "must be nonnegative");
  p.snap_stride = count_field(kv, "pde.snap_stride", 1, 1);
  p.sample_stride = count_field(kv, "pde.sample_stride", 5, 1);
  p.rank = count_field(kv, "pde.rank", 10, 2);
  const std::string field = kv.text_or("pde.field", "u");
  if (field != "u" && field != "v") throw ConfigError("pde.field", "expected 'u' or 'v'");
  p.use_v = field == "v";
  p.forecast_steps = count_field(kv, "pde.forecast_steps", 40, 0);
  p.verify_forecast = kv.boolean_or("pde.verify_forecast", true);
  p.batch = count_field(kv, "pde.batch", 1860, 0);
  p.batch_steps = count_field(kv, "pde.batch_steps", 50, 1);
  p.batch_scale = positive_field(kv, "pde.batch_scale", 1.0);
  const long long seed = kv.integer_or("pde.seed", 1);
  if (seed < 0) throw ConfigError("pde.seed", "must be nonnegative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.export_snapshots = kv.boolean_or("pde.export_snapshots", false);

  const double h = 2.0 * p.lx / static_cast<double>(p.nx);
  if (std::abs(h - 2.0 * p.ly / static_cast<double>(p.ny)) > 1e-12 * h) {
    throw ConfigError("pde.ly", "grid spacing must match on both axes");
  }
  if (p.params.diffusion > 0.0 && !(p.dt < h * h / (4.0 * p.params.diffusion))) {
    throw ConfigError("pde.dt", fmt::format("must satisfy dt < h^2/(4D) = {}", h * h / (4.0 * p.params.diffusion)));
  }
  return p;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  const KeyValueConfig kv = KeyValueConfig::parse(text);
  ExperimentConfig cfg;
  cfg.name = kv.text_or("name", "experiment");

  const bool pde = !kv.keys_with_prefix("pde.").empty();
  std::size_t dim = 2;
  if (pde) {
    if (kv.has("system.name")) throw ConfigError("system.name", "not allowed together with a pde block");
    cfg.pde = parse_pde(kv);
    cfg.stlsq.lambda = 0.01;
  } else {
    cfg.system = kv.text("system.name");
    for (const auto& key : kv.keys_with_prefix("system.")) {
      if (key == "system.name") continue;
      cfg.parameters[key.substr(7)] = kv.real(key);
    }
    OdeSystem sys;
    try {
      sys = builtin_system(cfg.system, cfg.parameters);
    } catch (const InvalidArgument& e) {
      const bool unknown_system =
          std::string(e.what()).rfind("unknown system", 0) == 0;
      std::string field = "system.name";
      if (!unknown_system) {
        for (const auto& [k, v] : cfg.parameters) {
          if (std::string(e.what()).find("'" + k + "'") != std::string::npos) field = "system." + k;
        }
      }
      throw ConfigError(field, e.what());
    }
    dim = sys.dimension;

    auto& in = cfg.integration;
    in.t0 = kv.real_or("integration.t0", 0.0);
    in.t1 = kv.real("integration.t1");
    if (!(in.t1 > in.t0)) throw ConfigError("integration.t1", "must exceed integration.t0");
    in.dt = positive_field(kv, "integration.dt", 0.01);
    in.n_trajectories = count_field(kv, "integration.n_trajectories", 5, 1);
    const long long seed = kv.integer_or("integration.seed", 1);
    if (seed < 0) throw ConfigError("integration.seed", "must be nonnegative");
    in.seed = static_cast<std::uint64_t>(seed);
    in.init_box = box_field(kv, "integration.init_box", dim);

    cfg.section = parse_section(kv, sys);
    cfg.skip = count_field(kv, "section.skip", 0, 0);
    cfg.write_trajectories = kv.boolean_or("output.trajectories", true);
  }

  const long long degree = kv.integer_or("library.degree", 5);
  if (degree < 1) throw ConfigError("library.degree", "must be >= 1");
  cfg.degree = static_cast<int>(degree);

  cfg.stlsq.lambda = positive_field(kv, "stlsq.lambda", cfg.stlsq.lambda);
  const long long max_it = kv.integer_or("stlsq.max_iterations", 25);
  if (max_it < 1) throw ConfigError("stlsq.max_iterations", "must be >= 1");
  cfg.stlsq.max_iterations = static_cast<int>(max_it);
  cfg.stlsq.ridge = kv.real_or("stlsq.ridge", 0.0);
  if (cfg.stlsq.ridge < 0.0) throw ConfigError("stlsq.ridge", "must be nonnegative");

  auto& an = cfg.analysis;
  const std::size_t section_dim = [&]() -> std::size_t {
    if (pde) return 2;
    if (const auto* h = std::get_if<HyperplaneSection>(&cfg.section)) return h->record_indices.size();
    return dim;
  }();
  an.fixed_points = kv.boolean_or("analysis.fixed_points", false);
  if (an.fixed_points) an.search_box = box_field(kv, "analysis.search_box", section_dim);
  an.seeds_per_axis = count_field(kv, "analysis.seeds_per_axis", 8, 1);
  an.cycle = kv.boolean_or("analysis.cycle", false);
  an.cycle_transient = count_field(kv, "analysis.cycle_transient", 1000, 0);
  an.max_period = count_field(kv, "analysis.max_period", 64, 1);
  an.cycle_tol = positive_field(kv, "analysis.cycle_tol", 1e-6);
  an.bands = kv.boolean_or("analysis.bands", false);
  if (an.bands && section_dim != 1) throw ConfigError("analysis.bands", "requires a one-dimensional section");
  an.band_iterates = count_field(kv, "analysis.band_iterates", 5000, 1);
  an.band_bins = count_field(kv, "analysis.band_bins", 100, 1);
  if (kv.has("analysis.sweep")) {
    an.sweep = kv.reals("analysis.sweep");
    for (double l : an.sweep) {
      if (!(l > 0.0)) throw ConfigError("analysis.sweep", "lambdas must be positive");
    }
  }
  an.forecast = count_field(kv, "analysis.forecast", 0, 0);

  kv.reject_unused();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text(path));
}

}  // namespace psindy
