#include "knudsenlab/config.hpp"

#include "knudsenlab/output.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace knudsenlab {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    bad_value(key, raw, "expected a finite number");
  return v;
}

long long to_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) bad_value(key, raw, "expected an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, raw, "expected true or false");
}

const std::set<std::string>& allowed_experiment_keys(ExperimentKind k) {
  static const std::set<std::string> verify{"type", "k", "tol", "output_dir"};
  static const std::set<std::string> run{"type", "k", "T", "dt", "data", "amplitude", "max_mode",
                                         "nonlinear", "sample_every", "output_dir"};
  static const std::set<std::string> decay{"type", "k", "T", "dt", "data", "amplitude", "max_mode", "nonlinear",
                                           "sample_every", "output_dir", "tau_band", "window_start"};
  static const std::set<std::string> branches{"type", "zeta_max", "zeta_points", "omega_angle", "tau_max",
                                              "amplitude", "max_mode", "output_dir"};
  static const std::set<std::string> hydro{"type", "k", "T", "data", "amplitude", "max_mode", "small_time",
                                           "acoustic_T", "slope_min", "output_dir"};
  switch (k) {
    case ExperimentKind::verify: return verify;
    case ExperimentKind::simulate: return run;
    case ExperimentKind::decay_sweep: return decay;
    case ExperimentKind::branches: return branches;
    case ExperimentKind::hydro_sweep: return hydro;
  }
  return verify;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::verify: return "verify";
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::decay_sweep: return "decay-sweep";
    case ExperimentKind::branches: return "branches";
    case ExperimentKind::hydro_sweep: return "hydro-sweep";
  }
  return "verify";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::verify, ExperimentKind::simulate, ExperimentKind::decay_sweep, ExperimentKind::branches,
                 ExperimentKind::hydro_sweep})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment type '" + name + "'");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream s;
  const auto d = [](double v) { return format_double(v); };
  const auto od = [&](const std::optional<double>& v) { return v ? d(*v) : std::string("default"); };
  const ExperimentBlock& e = experiment;
  s << "model.kind=" << to_string(model.kind) << "\nmodel.K=" << model.K << "\nmodel.Mx=" << model.Mx
    << "\nmodel.N=" << model.N << "\nmodel.delta_q=" << d(model.params.delta_q)
    << "\nmodel.kappa_inf=" << d(model.params.kappa_inf) << "\nepsilon.grid=";
  for (std::size_t i = 0; i < eps_grid.size(); ++i) s << (i ? "," : "") << d(eps_grid[i]);
  s << "\nexperiment.type=" << to_string(e.kind) << "\nexperiment.k=" << e.k << "\nexperiment.T=" << od(e.T)
    << "\nexperiment.dt=" << od(e.dt) << "\nexperiment.data=" << e.data << "\nexperiment.amplitude=" << d(e.amplitude)
    << "\nexperiment.max_mode=" << e.max_mode << "\nexperiment.nonlinear=" << e.nonlinear
    << "\nexperiment.sample_every=" << e.sample_every << "\nexperiment.tol=" << d(e.tol)
    << "\nexperiment.tau_band=" << d(e.tau_band) << "\nexperiment.window_start=" << od(e.window_start)
    << "\nexperiment.zeta_max=" << d(e.zeta_max) << "\nexperiment.zeta_points=" << e.zeta_points
    << "\nexperiment.omega_angle=" << d(e.omega_angle) << "\nexperiment.tau_max=" << d(e.tau_max)
    << "\nexperiment.small_time=" << d(e.small_time) << "\nexperiment.acoustic_T=" << d(e.acoustic_T)
    << "\nexperiment.slope_min=" << d(e.slope_min) << "\nruntime.seed=" << runtime.seed << '\n';
  return s.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

void validate(const ExperimentConfig& c) {
  const ModelBlock& m = c.model;
  require(m.N == 1 || m.N == 2, "model.N must be 1 or 2");
  require(m.K >= 2 && m.K <= 40, "model.K must lie in 2..40");
  require(m.Mx >= 1 && m.Mx <= 64, "model.Mx must lie in 1..64");
  require(m.params.delta_q > 0.0 && m.params.kappa_inf > 0.0, "model.delta_q and model.kappa_inf must be positive");
  require(!c.eps_grid.empty(), "missing key epsilon.grid (empty epsilon grid)");
  for (double e : c.eps_grid) require(e > 0.0 && e <= 1.0, "epsilon.grid values must lie in (0, 1]");
  const ExperimentBlock& x = c.experiment;
  require(x.k >= 1 && x.k <= 3, "experiment.k must lie in 1..3");
  require(!x.T || *x.T > 0.0, "experiment.T must be positive");
  require(!x.dt || *x.dt > 0.0, "experiment.dt must be positive");
  require(x.amplitude > 0.0, "experiment.amplitude must be positive");
  require(x.max_mode >= 1 && x.max_mode <= m.Mx, "experiment.max_mode must lie in 1..model.Mx");
  require(x.sample_every >= 1, "experiment.sample_every must be >= 1");
  require(x.tol > 0.0, "experiment.tol must be positive");
  require(x.tau_band >= 1.0, "experiment.tau_band must be >= 1");
  require(!x.window_start || (*x.window_start >= 0.0 && (!x.T || *x.window_start < *x.T)),
          "experiment.window_start must lie in [0, T)");
  require(x.zeta_max > 0.0 && x.zeta_points >= 6, "experiment.zeta_max must be positive and zeta_points >= 6");
  require(x.tau_max > 0.0, "experiment.tau_max must be positive");
  require(x.small_time > 0.0 && x.acoustic_T > 0.0, "experiment.small_time and acoustic_T must be positive");
  const bool hydro_data = x.data == "well_prepared" || x.data == "ill_prepared";
  switch (x.kind) {
    case ExperimentKind::simulate:
    case ExperimentKind::decay_sweep:
      require(x.data == "random" || hydro_data, "experiment.data must be random, well_prepared or ill_prepared");
      if (x.nonlinear)
        require(m.kind == ModelKind::SemiClassical || m.kind == ModelKind::BGKQuadratic,
                "experiment.nonlinear needs a model with a bilinear term (SemiClassical or BGKQuadratic)");
      if (hydro_data) require(m.N == 2 && (m.kind == ModelKind::HydroBGK || m.kind == ModelKind::BGKQuadratic),
                              "hydrodynamic data need N = 2 and a HydroBGK or BGKQuadratic model");
      break;
    case ExperimentKind::hydro_sweep:
      require(x.data == "both" || hydro_data, "experiment.data must be well_prepared, ill_prepared or both");
      require(m.N == 2 && m.kind == ModelKind::HydroBGK, "hydro-sweep needs model.kind = HydroBGK and N = 2");
      require(c.eps_grid.size() >= 4, "hydro-sweep needs at least 4 epsilon values");
      break;
    default:
      break;
  }
  if (x.kind == ExperimentKind::decay_sweep) require(c.eps_grid.size() >= 2, "decay-sweep needs at least 2 epsilon values");
  require(c.runtime.threads >= 1, "runtime.threads must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  c.experiment.data.clear();
  const std::set<std::string> sections{"model", "epsilon", "experiment", "runtime"};
  for (const auto& [name, sub] : tree) {
    if (!sections.count(name)) throw ConfigError("unknown config section or top-level key '" + name + "'");
    if (!sub.data().empty()) throw ConfigError("config key '" + name + "' must be a section");
  }
  const auto section = [&](const std::string& name) -> const pt::ptree& {
    static const pt::ptree empty;
    const auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
  };

  for (const auto& [key, v] : section("model")) {
    const std::string full = "model." + key, s = v.data();
    if (key == "kind") {
      try {
        c.model.kind = parse_model_kind(trim(s));
      } catch (const std::invalid_argument&) {
        bad_value(full, s, "unknown model");
      }
    } else if (key == "K") c.model.K = static_cast<int>(to_int(full, s));
    else if (key == "Mx") c.model.Mx = static_cast<int>(to_int(full, s));
    else if (key == "N") c.model.N = static_cast<int>(to_int(full, s));
    else if (key == "delta_q") c.model.params.delta_q = to_double(full, s);
    else if (key == "kappa_inf") c.model.params.kappa_inf = to_double(full, s);
    else throw ConfigError("unknown config key '" + full + "'");
  }

  for (const auto& [key, v] : section("epsilon")) {
    if (key != "grid") throw ConfigError("unknown config key 'epsilon." + key + "'");
    std::istringstream list(v.data());
    std::string item;
    while (std::getline(list, item, ','))
      if (!trim(item).empty()) c.eps_grid.push_back(to_double("epsilon.grid", item));
  }

  const pt::ptree& ex = section("experiment");
  const auto type = ex.find("type");
  if (type == ex.not_found()) throw ConfigError("missing key experiment.type");
  c.experiment.kind = parse_experiment_kind(trim(type->second.data()));
  const auto& allowed = allowed_experiment_keys(c.experiment.kind);
  for (const auto& [key, v] : ex) {
    const std::string full = "experiment." + key, s = v.data();
    if (!allowed.count(key))
      throw ConfigError("unknown config key '" + full + "' for experiment type " + to_string(c.experiment.kind));
    ExperimentBlock& x = c.experiment;
    if (key == "type") continue;
    if (key == "k") x.k = static_cast<int>(to_int(full, s));
    else if (key == "T") x.T = to_double(full, s);
    else if (key == "dt") x.dt = to_double(full, s);
    else if (key == "data") x.data = trim(s);
    else if (key == "amplitude") x.amplitude = to_double(full, s);
    else if (key == "max_mode") x.max_mode = static_cast<int>(to_int(full, s));
    else if (key == "nonlinear") x.nonlinear = to_bool(full, s);
    else if (key == "sample_every") x.sample_every = static_cast<int>(to_int(full, s));
    else if (key == "output_dir") x.output_dir = trim(s);
    else if (key == "tol") x.tol = to_double(full, s);
    else if (key == "tau_band") x.tau_band = to_double(full, s);
    else if (key == "window_start") x.window_start = to_double(full, s);
    else if (key == "zeta_max") x.zeta_max = to_double(full, s);
    else if (key == "zeta_points") x.zeta_points = static_cast<int>(to_int(full, s));
    else if (key == "omega_angle") x.omega_angle = to_double(full, s);
    else if (key == "tau_max") x.tau_max = to_double(full, s);
    else if (key == "small_time") x.small_time = to_double(full, s);
    else if (key == "acoustic_T") x.acoustic_T = to_double(full, s);
    else if (key == "slope_min") x.slope_min = to_double(full, s);
  }
  if (c.experiment.data.empty())
    c.experiment.data = c.experiment.kind == ExperimentKind::hydro_sweep ? "both" : "random";

  for (const auto& [key, v] : section("runtime")) {
    const std::string full = "runtime." + key;
    if (key == "threads") c.runtime.threads = static_cast<int>(to_int(full, v.data()));
    else if (key == "seed") {
      const long long s = to_int(full, v.data());
      if (s < 0) bad_value(full, v.data(), "expected a nonnegative integer");
      c.runtime.seed = static_cast<std::uint64_t>(s);
    } else throw ConfigError("unknown config key '" + full + "'");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace knudsenlab
