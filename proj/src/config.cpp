#include "critwin/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "critwin/error.hpp"
#include "critwin/rng.hpp"

namespace critwin {

using nlohmann::json;

namespace {

void check_keys(const json& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : node.items())
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

template <class T>
T get_or(const json& node, const char* key, T fallback, const std::string& where) {
  if (!node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double finite_number(const json& node, const std::string& where) {
  if (!node.is_number()) throw ConfigError(where + ": expected a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
  return v;
}

int integer(const json& node, const std::string& where) {
  if (!node.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return node.get<int>();
}

int count_at_least(const json& node, const char* key, int fallback, int lo, const std::string& where) {
  const int v = node.contains(key) ? integer(node.at(key), where + "." + key) : fallback;
  if (v < lo) throw ConfigError(where + "." + key + " must be >= " + std::to_string(lo));
  return v;
}

void check_times(const std::vector<double>& grid, const std::string& what) {
  if (grid.empty()) throw ConfigError(what + ": empty grid");
  for (double t : grid)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError(what + ": value outside [0, 1]");
}

int parse_radius(const json& node, const LatticeSpec& lat, const std::string& where) {
  if (node.is_string() && node.get<std::string>() == "diameter") return lat.diameter();
  const int r = integer(node, where);
  if (r < 0) throw ConfigError(where + ": radius must be >= 0");
  return r;
}

std::vector<int> parse_radii(const json& node, const LatticeSpec& lat, const std::string& where) {
  if (!node.is_array() || node.empty()) throw ConfigError(where + ": expected a nonempty array");
  std::vector<int> out;
  for (std::size_t k = 0; k < node.size(); ++k)
    out.push_back(parse_radius(node[k], lat, where + "[" + std::to_string(k) + "]"));
  return out;
}

Scope parse_scope(const json& node, const LatticeSpec& lat, const std::string& where) {
  if (node.is_string() && node.get<std::string>() == "global") return Scope::global();
  if (node.is_object()) {
    check_keys(node, where, {"local"});
    if (!node.contains("local")) throw ConfigError(where + ": expected {\"local\": r}");
    return Scope::local(parse_radius(node.at("local"), lat, where + ".local"));
  }
  return Scope::local(parse_radius(node, lat, where));
}

ScoreMode parse_mode(const json& node, const std::string& where) {
  if (node.is_string()) {
    if (node.get<std::string>() == "uncond") return ScoreMode::uncond();
    throw ConfigError(where + ": unknown mode '" + node.get<std::string>() + "'");
  }
  check_keys(node, where, {"kind", "y", "w"});
  const std::string kind = get_or<std::string>(node, "kind", "", where);
  if (kind == "uncond") return ScoreMode::uncond();
  if (!node.contains("y")) throw ConfigError(where + ": missing class 'y'");
  const int y = integer(node.at("y"), where + ".y");
  if (kind == "cond") return ScoreMode::cond(y);
  if (kind == "cfg") {
    if (!node.contains("w")) throw ConfigError(where + ": cfg needs 'w'");
    return ScoreMode::cfg(y, finite_number(node.at("w"), where + ".w"));
  }
  throw ConfigError(where + ": unknown mode kind '" + kind + "'");
}

json mode_json(const ScoreMode& m) {
  switch (m.kind) {
    case ScoreMode::Kind::Uncond: return "uncond";
    case ScoreMode::Kind::Cond: return {{"kind", "cond"}, {"y", m.y}};
    case ScoreMode::Kind::Cfg: return {{"kind", "cfg"}, {"y", m.y}, {"w", m.w}};
  }
  return nullptr;
}

json scope_json(const Scope& s) {
  if (s.is_global()) return "global";
  return {{"local", s.radius}};
}

DenoiserPolicy parse_policy(const json& node, const LatticeSpec& lat, int n_classes,
                            const std::string& where) {
  check_keys(node, where, {"default", "windows"});
  ScoreMode def_mode;
  Scope def_scope;
  if (node.contains("default")) {
    const json& d = node.at("default");
    check_keys(d, where + ".default", {"mode", "scope"});
    if (d.contains("mode")) def_mode = parse_mode(d.at("mode"), where + ".default.mode");
    if (d.contains("scope")) def_scope = parse_scope(d.at("scope"), lat, where + ".default.scope");
  }
  std::vector<DenoiserPolicy::Window> windows;
  if (node.contains("windows")) {
    const json& ws = node.at("windows");
    if (!ws.is_array()) throw ConfigError(where + ".windows: expected an array");
    for (std::size_t k = 0; k < ws.size(); ++k) {
      const std::string w = where + ".windows[" + std::to_string(k) + "]";
      check_keys(ws[k], w, {"t_lo", "t_hi", "mode", "scope"});
      if (!ws[k].contains("t_lo") || !ws[k].contains("t_hi") || !ws[k].contains("mode"))
        throw ConfigError(w + ": needs t_lo, t_hi and mode");
      windows.push_back({finite_number(ws[k].at("t_lo"), w + ".t_lo"),
                         finite_number(ws[k].at("t_hi"), w + ".t_hi"),
                         parse_mode(ws[k].at("mode"), w + ".mode"),
                         ws[k].contains("scope") ? parse_scope(ws[k].at("scope"), lat, w + ".scope")
                                                 : Scope::global()});
    }
  }
  DenoiserPolicy policy(std::move(windows), def_mode, def_scope);
  policy.validate(n_classes);
  return policy;
}

json policy_json(const DenoiserPolicy& p) {
  json windows = json::array();
  for (const auto& w : p.windows())
    windows.push_back({{"t_lo", w.t_lo}, {"t_hi", w.t_hi}, {"mode", mode_json(w.mode)},
                       {"scope", scope_json(w.scope)}});
  return {{"default", {{"mode", mode_json(p.default_mode())}, {"scope", scope_json(p.default_scope())}}},
          {"windows", windows}};
}

std::vector<double> number_list(const json& node, const std::string& where) {
  if (!node.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < node.size(); ++k)
    out.push_back(finite_number(node[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

ModelSpec parse_model(const json& node) {
  const std::string w = "model";
  check_keys(node, w, {"lattice", "priors", "n_classes", "means", "m", "site_snr", "kappa", "lambda"});
  ModelSpec spec;
  if (node.contains("lattice")) {
    const json& lat = node.at("lattice");
    check_keys(lat, w + ".lattice", {"shape", "length", "height", "width"});
    const std::string shape = get_or<std::string>(lat, "shape", "ring", w + ".lattice");
    try {
      if (shape == "ring") {
        spec.lattice = LatticeSpec::ring(count_at_least(lat, "length", 64, 1, w + ".lattice"));
      } else if (shape == "torus") {
        spec.lattice = LatticeSpec::torus(count_at_least(lat, "height", 8, 1, w + ".lattice"),
                                          count_at_least(lat, "width", 8, 1, w + ".lattice"));
      } else {
        throw ConfigError(w + ".lattice.shape: unknown shape '" + shape + "'");
      }
    } catch (const InputError& e) {
      throw ConfigError(w + ".lattice: " + e.what());
    }
  }
  if (node.contains("priors")) {
    spec.priors = number_list(node.at("priors"), w + ".priors");
    if (node.contains("n_classes") &&
        integer(node.at("n_classes"), w + ".n_classes") != static_cast<int>(spec.priors.size()))
      throw ConfigError(w + ": n_classes disagrees with priors");
  } else if (node.contains("n_classes")) {
    const int k = count_at_least(node, "n_classes", 2, 1, w);
    spec.priors.assign(k, 1.0 / k);
  }
  const int k = static_cast<int>(spec.priors.size());
  if (k < 1) throw ConfigError(w + ": need at least one class");
  double total = 0.0;
  for (double p : spec.priors) {
    if (!(p > 0.0)) throw ConfigError(w + ".priors: entries must be > 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(w + ".priors: must sum to 1");

  spec.signs.clear();
  for (int y = 0; y < k; ++y) spec.signs.push_back(k == 1 ? 1.0 : 1.0 - 2.0 * y / (k - 1));
  if (node.contains("means")) {
    const json& mn = node.at("means");
    check_keys(mn, w + ".means", {"pattern", "signs", "frequencies", "phases"});
    const std::string pattern = get_or<std::string>(mn, "pattern", "constant", w + ".means");
    if (pattern == "constant") {
      spec.pattern = MeanPattern::Constant;
      if (mn.contains("signs")) spec.signs = number_list(mn.at("signs"), w + ".means.signs");
      if (static_cast<int>(spec.signs.size()) != k)
        throw ConfigError(w + ".means.signs: need one entry per class");
    } else if (pattern == "sinusoidal") {
      spec.pattern = MeanPattern::Sinusoidal;
      spec.signs.clear();
      if (!mn.contains("frequencies")) throw ConfigError(w + ".means: sinusoidal needs frequencies");
      spec.frequencies = number_list(mn.at("frequencies"), w + ".means.frequencies");
      spec.phases = mn.contains("phases") ? number_list(mn.at("phases"), w + ".means.phases")
                                          : std::vector<double>(k, 0.0);
      if (static_cast<int>(spec.frequencies.size()) != k || static_cast<int>(spec.phases.size()) != k)
        throw ConfigError(w + ".means: need one frequency and phase per class");
    } else {
      throw ConfigError(w + ".means.pattern: unknown pattern '" + pattern + "'");
    }
  }
  if (node.contains("m") && node.contains("site_snr"))
    throw ConfigError(w + ": give either m or site_snr, not both");
  if (node.contains("m")) spec.m = finite_number(node.at("m"), w + ".m");
  if (node.contains("site_snr")) {
    spec.site_snr = finite_number(node.at("site_snr"), w + ".site_snr");
    if (*spec.site_snr < 0.0) throw ConfigError(w + ".site_snr must be >= 0");
  }
  if (!spec.m && !spec.site_snr) spec.site_snr = kDefaultSiteSnr;
  spec.kappa = node.contains("kappa") ? finite_number(node.at("kappa"), w + ".kappa") : 1.0;
  spec.lambda = node.contains("lambda") ? finite_number(node.at("lambda"), w + ".lambda") : 4.0;
  if (!(spec.kappa > 0.0)) throw ConfigError(w + ".kappa must be > 0");
  if (!(spec.lambda >= 0.0)) throw ConfigError(w + ".lambda must be >= 0");
  return spec;
}

ScheduleSpec parse_schedule(const json& node) {
  const std::string w = "schedule";
  check_keys(node, w, {"kind", "t_min", "t_max", "beta_min", "beta_max"});
  ScheduleSpec spec;
  const std::string kind = get_or<std::string>(node, "kind", "vp-cosine", w);
  if (kind == "vp-cosine" || kind == "cosine") {
    spec.kind = ScheduleKind::VpCosine;
  } else if (kind == "vp-linear" || kind == "linear") {
    spec.kind = ScheduleKind::VpLinearBeta;
  } else {
    throw ConfigError(w + ".kind: unknown schedule '" + kind + "'");
  }
  if (node.contains("t_min")) spec.t_min = finite_number(node.at("t_min"), w + ".t_min");
  if (node.contains("t_max")) spec.t_max = finite_number(node.at("t_max"), w + ".t_max");
  if (node.contains("beta_min")) spec.beta_min = finite_number(node.at("beta_min"), w + ".beta_min");
  if (node.contains("beta_max")) spec.beta_max = finite_number(node.at("beta_max"), w + ".beta_max");
  try {
    (void)build_schedule(spec);
  } catch (const InputError& e) {
    throw ConfigError(w + ": " + e.what());
  }
  return spec;
}

ScanOptions parse_scan_options(const json& node, const std::string& w) {
  ScanOptions o;
  o.n_samples = count_at_least(node, "n_samples", 500, 2, w);
  o.n_steps = count_at_least(node, "n_steps", 200, 1, w);
  o.n_boot = count_at_least(node, "n_boot", 200, 100, w);
  return o;
}

void check_class(int y, int k, const std::string& where) {
  if (y < 0 || y >= k) throw ConfigError(where + ": class " + std::to_string(y) + " out of range");
}

}  // namespace

std::string to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::ScoreGap: return "score-gap";
    case ProbeKind::ForwardBackward: return "fb";
    case ProbeKind::WindowCond: return "window-cond";
    case ProbeKind::WindowLocal: return "window-local";
    case ProbeKind::Cmi: return "cmi";
  }
  return "?";
}

ProbeKind probe_kind_from_string(const std::string& name) {
  for (ProbeKind k : {ProbeKind::ScoreGap, ProbeKind::ForwardBackward, ProbeKind::WindowCond,
                      ProbeKind::WindowLocal, ProbeKind::Cmi})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown probe kind '" + name + "'");
}

std::vector<double> parse_grid(const json& node, const std::string& what) {
  if (node.is_array()) return number_list(node, what);
  check_keys(node, what, {"start", "stop", "step"});
  if (!node.contains("start") || !node.contains("stop") || !node.contains("step"))
    throw ConfigError(what + ": grid needs start, stop and step");
  const double a = finite_number(node.at("start"), what + ".start");
  const double b = finite_number(node.at("stop"), what + ".stop");
  const double h = finite_number(node.at("step"), what + ".step");
  if (!(h > 0.0) || !(b >= a)) throw ConfigError(what + ": need step > 0 and stop >= start");
  const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
  if (n > 100000) throw ConfigError(what + ": grid too large");
  std::vector<double> out;
  for (long k = 0; k < n; ++k) out.push_back(std::round((a + k * h) * 1e12) / 1e12);
  return out;
}

NoiseSchedule build_schedule(const ScheduleSpec& spec) {
  if (spec.kind == ScheduleKind::VpCosine) return NoiseSchedule::cosine(spec.t_min, spec.t_max);
  return NoiseSchedule::linear_beta(spec.beta_min, spec.beta_max, spec.t_min, spec.t_max);
}

GaussianMixtureModel build_model(const ModelSpec& spec) {
  const int n = spec.lattice.n_sites();
  const int k = static_cast<int>(spec.priors.size());
  double amplitude = spec.m.value_or(0.0);
  if (!spec.m) {
    const GaussianMixtureModel probe(spec.lattice, {1.0}, {Eigen::VectorXd::Zero(n)}, spec.kappa,
                                     spec.lambda);
    amplitude = std::sqrt(spec.site_snr.value_or(kDefaultSiteSnr) * site_variance(probe));
  }
  std::vector<Eigen::VectorXd> means;
  for (int y = 0; y < k; ++y) {
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) {
      if (spec.pattern == MeanPattern::Constant) {
        mu[i] = spec.signs[y] * amplitude;
      } else {
        const double u = static_cast<double>(i % spec.lattice.width()) / spec.lattice.width();
        mu[i] = amplitude * std::cos(2.0 * std::numbers::pi * spec.frequencies[y] * u + spec.phases[y]);
      }
    }
    means.push_back(std::move(mu));
  }
  return GaussianMixtureModel(spec.lattice, spec.priors, std::move(means), spec.kappa, spec.lambda);
}

ExperimentConfig parse_config(const json& doc, std::optional<ProbeKind> expected) {
  check_keys(doc, "config", {"model", "schedule", "probe", "master_seed", "output_dir"});
  ExperimentConfig cfg;
  cfg.model = parse_model(doc.contains("model") ? doc.at("model") : json::object());
  cfg.schedule = parse_schedule(doc.contains("schedule") ? doc.at("schedule") : json::object());
  if (doc.contains("master_seed")) {
    if (!doc.at("master_seed").is_number_unsigned() && !doc.at("master_seed").is_number_integer())
      throw ConfigError("master_seed: expected a non-negative integer");
    if (doc.at("master_seed").is_number_integer() && doc.at("master_seed").get<long long>() < 0)
      throw ConfigError("master_seed: expected a non-negative integer");
    cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
  }
  cfg.output_dir = get_or<std::string>(doc, "output_dir", "out", "config");

  const json probe = doc.contains("probe") ? doc.at("probe") : json::object();
  if (!probe.is_object()) throw ConfigError("probe: expected an object");
  if (probe.contains("kind")) {
    cfg.kind = probe_kind_from_string(get_or<std::string>(probe, "kind", "", "probe"));
    if (expected && *expected != cfg.kind)
      throw ConfigError("probe.kind '" + to_string(cfg.kind) + "' does not match subcommand '" +
                        to_string(*expected) + "'");
  } else if (expected) {
    cfg.kind = *expected;
  } else {
    throw ConfigError("probe.kind missing");
  }

  const LatticeSpec& lat = cfg.model.lattice;
  const int k = static_cast<int>(cfg.model.priors.size());
  const std::string w = "probe";
  const json default_t = {{"start", 0.05}, {"stop", 0.95}, {"step", 0.05}};
  switch (cfg.kind) {
    case ProbeKind::ScoreGap: {
      check_keys(probe, w, {"kind", "y", "trajectory", "t_grid", "r_grid", "cond", "n_samples",
                            "n_steps", "sampling_policy"});
      auto& p = cfg.score_gap;
      p.y = probe.contains("y") ? integer(probe.at("y"), w + ".y") : 0;
      check_class(p.y, k, w + ".y");
      p.trajectory = trajectory_kind_from_string(get_or<std::string>(probe, "trajectory", "training", w));
      p.t_grid = parse_grid(probe.contains("t_grid") ? probe.at("t_grid") : default_t, w + ".t_grid");
      check_times(p.t_grid, w + ".t_grid");
      p.r_grid = probe.contains("r_grid") ? parse_radii(probe.at("r_grid"), lat, w + ".r_grid")
                                          : std::vector<int>{1, 2, 4, lat.diameter()};
      p.cond = get_or<bool>(probe, "cond", true, w);
      p.n_samples = count_at_least(probe, "n_samples", 500, 2, w);
      p.n_steps = count_at_least(probe, "n_steps", 200, 1, w);
      if (probe.contains("sampling_policy"))
        p.sampling_policy = parse_policy(probe.at("sampling_policy"), lat, k, w + ".sampling_policy");
      break;
    }
    case ProbeKind::ForwardBackward: {
      check_keys(probe, w, {"kind", "scopes", "t_grid", "n_clean", "n_noise", "n_steps"});
      auto& p = cfg.fb;
      if (probe.contains("scopes")) {
        const json& sc = probe.at("scopes");
        if (!sc.is_array() || sc.empty()) throw ConfigError(w + ".scopes: expected a nonempty array");
        p.scopes.clear();
        for (std::size_t i = 0; i < sc.size(); ++i)
          p.scopes.push_back(parse_scope(sc[i], lat, w + ".scopes[" + std::to_string(i) + "]"));
      }
      p.t_grid = parse_grid(probe.contains("t_grid") ? probe.at("t_grid") : default_t, w + ".t_grid");
      check_times(p.t_grid, w + ".t_grid");
      p.n_clean = count_at_least(probe, "n_clean", 100, 1, w);
      p.n_noise = count_at_least(probe, "n_noise", 5, 1, w);
      if (static_cast<long>(p.n_clean) * p.n_noise < 2)
        throw ConfigError(w + ": n_clean * n_noise must be >= 2");
      p.n_steps = count_at_least(probe, "n_steps", 200, 1, w);
      break;
    }
    case ProbeKind::WindowCond: {
      check_keys(probe, w, {"kind", "y", "width", "t_i_grid", "n_samples", "n_steps", "n_boot"});
      auto& p = cfg.window_cond;
      p.y = probe.contains("y") ? integer(probe.at("y"), w + ".y") : 0;
      check_class(p.y, k, w + ".y");
      p.width = probe.contains("width") ? finite_number(probe.at("width"), w + ".width") : 0.1;
      if (!(p.width > 0.0)) throw ConfigError(w + ".width must be > 0");
      p.t_i_grid = parse_grid(probe.contains("t_i_grid") ? probe.at("t_i_grid") : default_t,
                              w + ".t_i_grid");
      check_times(p.t_i_grid, w + ".t_i_grid");
      p.scan = parse_scan_options(probe, w);
      break;
    }
    case ProbeKind::WindowLocal: {
      check_keys(probe, w, {"kind", "y", "half_width", "r", "outside_mode", "t_i_grid", "n_samples",
                            "n_steps", "n_boot"});
      auto& p = cfg.window_local;
      p.y = probe.contains("y") ? integer(probe.at("y"), w + ".y") : 0;
      check_class(p.y, k, w + ".y");
      p.half_width =
          probe.contains("half_width") ? finite_number(probe.at("half_width"), w + ".half_width") : 0.2;
      if (!(p.half_width > 0.0)) throw ConfigError(w + ".half_width must be > 0");
      p.r = probe.contains("r") ? parse_radius(probe.at("r"), lat, w + ".r") : 2;
      const std::string om = get_or<std::string>(probe, "outside_mode", "uncond", w);
      if (om == "uncond") {
        p.outside_mode = ScoreMode::uncond();
      } else if (om == "cond") {
        p.outside_mode = ScoreMode::cond(p.y);
      } else {
        throw ConfigError(w + ".outside_mode: expected 'uncond' or 'cond'");
      }
      p.t_i_grid = parse_grid(probe.contains("t_i_grid") ? probe.at("t_i_grid") : default_t,
                              w + ".t_i_grid");
      check_times(p.t_i_grid, w + ".t_i_grid");
      p.scan = parse_scan_options(probe, w);
      break;
    }
    case ProbeKind::Cmi: {
      check_keys(probe, w, {"kind", "t_grid", "r_grid", "a_sites", "n"});
      auto& p = cfg.cmi;
      p.t_grid = parse_grid(probe.contains("t_grid") ? probe.at("t_grid") : default_t, w + ".t_grid");
      check_times(p.t_grid, w + ".t_grid");
      p.r_grid = probe.contains("r_grid") ? parse_radii(probe.at("r_grid"), lat, w + ".r_grid")
                                          : std::vector<int>{0, 1, 2, 3, 4};
      if (probe.contains("a_sites")) {
        const json& a = probe.at("a_sites");
        if (!a.is_array() || a.empty()) throw ConfigError(w + ".a_sites: expected a nonempty array");
        p.a_sites.clear();
        for (std::size_t i = 0; i < a.size(); ++i) {
          const int site = integer(a[i], w + ".a_sites");
          if (!lat.valid_site(site)) throw ConfigError(w + ".a_sites: site out of range");
          p.a_sites.push_back(site);
        }
      }
      p.n = count_at_least(probe, "n", 2000, 100, w);
      break;
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<ProbeKind> expected) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, expected);
}

json ExperimentConfig::canonical() const {
  json model_j;
  const LatticeSpec& lat = model.lattice;
  if (lat.topology() == Topology::Ring1D) {
    model_j["lattice"] = {{"shape", "ring"}, {"length", lat.width()}};
  } else {
    model_j["lattice"] = {{"shape", "torus"}, {"height", lat.height()}, {"width", lat.width()}};
  }
  model_j["priors"] = model.priors;
  if (model.pattern == MeanPattern::Constant) {
    model_j["means"] = {{"pattern", "constant"}, {"signs", model.signs}};
  } else {
    model_j["means"] = {{"pattern", "sinusoidal"}, {"frequencies", model.frequencies}, {"phases", model.phases}};
  }
  if (model.m) model_j["m"] = *model.m;
  if (model.site_snr) model_j["site_snr"] = *model.site_snr;
  model_j["kappa"] = model.kappa;
  model_j["lambda"] = model.lambda;

  json sched = {{"kind", schedule.kind == ScheduleKind::VpCosine ? "vp-cosine" : "vp-linear"},
                {"t_min", schedule.t_min},
                {"t_max", schedule.t_max}};
  if (schedule.kind == ScheduleKind::VpLinearBeta) {
    sched["beta_min"] = schedule.beta_min;
    sched["beta_max"] = schedule.beta_max;
  }

  json probe = {{"kind", to_string(kind)}};
  auto scan_j = [](json& p, const ScanOptions& o) {
    p["n_samples"] = o.n_samples;
    p["n_steps"] = o.n_steps;
    p["n_boot"] = o.n_boot;
  };
  switch (kind) {
    case ProbeKind::ScoreGap:
      probe["y"] = score_gap.y;
      probe["trajectory"] = to_string(score_gap.trajectory);
      probe["t_grid"] = score_gap.t_grid;
      probe["r_grid"] = score_gap.r_grid;
      probe["cond"] = score_gap.cond;
      probe["n_samples"] = score_gap.n_samples;
      probe["n_steps"] = score_gap.n_steps;
      if (score_gap.sampling_policy) probe["sampling_policy"] = policy_json(*score_gap.sampling_policy);
      break;
    case ProbeKind::ForwardBackward: {
      json scopes = json::array();
      for (const Scope& s : fb.scopes) scopes.push_back(scope_json(s));
      probe["scopes"] = scopes;
      probe["t_grid"] = fb.t_grid;
      probe["n_clean"] = fb.n_clean;
      probe["n_noise"] = fb.n_noise;
      probe["n_steps"] = fb.n_steps;
      break;
    }
    case ProbeKind::WindowCond:
      probe["y"] = window_cond.y;
      probe["width"] = window_cond.width;
      probe["t_i_grid"] = window_cond.t_i_grid;
      scan_j(probe, window_cond.scan);
      break;
    case ProbeKind::WindowLocal:
      probe["y"] = window_local.y;
      probe["half_width"] = window_local.half_width;
      probe["r"] = window_local.r;
      probe["outside_mode"] = window_local.outside_mode.kind == ScoreMode::Kind::Uncond ? "uncond" : "cond";
      probe["t_i_grid"] = window_local.t_i_grid;
      scan_j(probe, window_local.scan);
      break;
    case ProbeKind::Cmi:
      probe["t_grid"] = cmi.t_grid;
      probe["r_grid"] = cmi.r_grid;
      probe["a_sites"] = cmi.a_sites;
      probe["n"] = cmi.n;
      break;
  }
  return {{"model", model_j}, {"schedule", sched}, {"probe", probe}, {"master_seed", master_seed}};
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical().dump())));
  return buf;
}

}  // namespace critwin
