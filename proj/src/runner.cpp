#include "critwin/runner.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "critwin/error.hpp"
#include "critwin/info.hpp"
#include "critwin/lattice.hpp"
#include "critwin/rng.hpp"

namespace critwin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string join(std::initializer_list<std::string> cols) {
  std::string out;
  for (const auto& c : cols) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string finite(double v) {
  if (!std::isfinite(v)) throw NumericError("non-finite value in probe output");
  return format_number(v);
}

std::vector<CsvTable> score_gap_tables(const ExperimentConfig& cfg, const GaussianMixtureModel& m,
                                       const NoiseSchedule& s) {
  const auto& p = cfg.score_gap;
  const ProbeExec exec{cfg.workers, p.n_steps};
  const DenoiserPolicy* policy = p.sampling_policy ? &*p.sampling_policy : nullptr;
  const GapCurve curve = conditioning_gap_curve(m, s, p.trajectory, p.y, p.t_grid, p.n_samples,
                                                cfg.master_seed, exec, policy);
  CsvTable cond{"gap_cond.csv", "t,mean,stderr,kind", {}};
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
    cond.rows.push_back(join({finite(curve.t_grid[i]), finite(curve.mean[i]),
                              finite(curve.std_error[i]), to_string(curve.trajectory_kind)}));

  const std::optional<int> c = p.cond ? std::optional<int>(p.y) : std::nullopt;
  const GapHeatmap heat = locality_gap_heatmap(m, s, p.trajectory, c, p.t_grid, p.r_grid,
                                               p.n_samples, cfg.master_seed, exec, p.y, policy);
  CsvTable local{"gap_local.csv", "t,r,mean,stderr", {}};
  for (std::size_t a = 0; a < heat.t_grid.size(); ++a)
    for (std::size_t b = 0; b < heat.r_grid.size(); ++b)
      local.rows.push_back(join({finite(heat.t_grid[a]), std::to_string(heat.r_grid[b]),
                                 finite(heat.mean(a, b)), finite(heat.std_error(a, b))}));
  return {cond, local};
}

std::vector<CsvTable> fb_tables(const ExperimentConfig& cfg, const GaussianMixtureModel& m,
                                const NoiseSchedule& s) {
  const auto& p = cfg.fb;
  CsvTable out{"fb.csv", "t,scope,error,err_stderr,mse", {}};
  for (const Scope& scope : p.scopes) {
    const ThresholdCurve curve = forward_backward(m, s, scope, p.t_grid, p.n_clean, p.n_noise,
                                                  p.n_steps, cfg.master_seed, cfg.workers);
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
      out.rows.push_back(join({finite(curve.t_grid[i]), scope.label(), finite(curve.error_rate[i]),
                               finite(curve.error_std_error[i]), finite(curve.mse[i])}));
  }
  return {out};
}

CsvTable scan_table(const std::string& name, const ScanResult& scan) {
  CsvTable out{name, "t_i,error,err_stderr,frechet,frechet_stderr", {}};
  for (const ScanPoint& p : scan.points)
    out.rows.push_back(join({finite(p.t_i), finite(p.error), finite(p.error_std_error),
                             finite(p.frechet), finite(p.frechet_std_error)}));
  return out;
}

std::vector<CsvTable> cmi_tables(const ExperimentConfig& cfg, const GaussianMixtureModel& m,
                                 const NoiseSchedule& s) {
  const auto& p = cfg.cmi;
  CsvTable values{"cmi.csv", "t,r,cmi,stderr", {}};
  CsvTable fits{"markov.csv", "t,xi,i0,r2", {}};
  for (std::size_t a = 0; a < p.t_grid.size(); ++a) {
    const double t = p.t_grid[a];
    std::vector<CmiPoint> pts;
    for (std::size_t b = 0; b < p.r_grid.size(); ++b) {
      const Tripartition part = tripartition(m.lattice(), p.a_sites, p.r_grid[b]);
      const CmiEstimate est =
          mixture_cmi_mc(m, s, t, part, p.n, derive_seed(cfg.master_seed, "cmi-cell", a, b), cfg.workers);
      values.rows.push_back(join({finite(t), std::to_string(p.r_grid[b]), finite(est.estimate),
                                  finite(est.std_error)}));
      pts.push_back({static_cast<double>(p.r_grid[b]), est.estimate});
    }
    // A fit that has too few usable points is reported as nan rather than
    // aborting the sweep.
    double xi = std::nan(""), i0 = std::nan(""), r2 = std::nan("");
    try {
      const MarkovFit fit = markov_length_fit(pts);
      xi = fit.xi;
      i0 = fit.i0;
      r2 = fit.r_squared;
    } catch (const FitError&) {
    }
    fits.rows.push_back(join({finite(t), format_number(xi), format_number(i0), format_number(r2)}));
  }
  return {values, fits};
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string render(const CsvTable& t) {
  std::string out = t.header + "\n";
  for (const auto& row : t.rows) out += row + "\n";
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<CsvTable> execute(const ExperimentConfig& cfg) {
  const GaussianMixtureModel model = build_model(cfg.model);
  const NoiseSchedule sched = build_schedule(cfg.schedule);
  switch (cfg.kind) {
    case ProbeKind::ScoreGap: return score_gap_tables(cfg, model, sched);
    case ProbeKind::ForwardBackward: return fb_tables(cfg, model, sched);
    case ProbeKind::WindowCond: {
      ScanOptions o = cfg.window_cond.scan;
      o.workers = cfg.workers;
      const auto& p = cfg.window_cond;
      return {scan_table("window_cond.csv", window_conditioning_scan(model, sched, p.y, p.width,
                                                                     p.t_i_grid, cfg.master_seed, o))};
    }
    case ProbeKind::WindowLocal: {
      ScanOptions o = cfg.window_local.scan;
      o.workers = cfg.workers;
      const auto& p = cfg.window_local;
      return {scan_table("window_local.csv",
                         window_locality_scan(model, sched, p.y, p.half_width, p.r, p.t_i_grid,
                                              cfg.master_seed, p.outside_mode, o))};
    }
    case ProbeKind::Cmi: return cmi_tables(cfg, model, sched);
  }
  throw ConfigError("unknown probe kind");
}

RunResult run(const std::string& config_path, std::optional<ProbeKind> kind,
              const RunOverrides& overrides) {
  RunResult result;
  std::vector<fs::path> written;
  fs::path dir;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    if (!dir.empty())
      for (const char* name : {"gap_cond.csv", "gap_local.csv", "fb.csv", "window_cond.csv",
                               "window_local.csv", "cmi.csv", "markov.csv", "manifest.json"})
        fs::remove(dir / (std::string(name) + ".tmp"), ec);
    result.files.clear();
  };
  try {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = load_config(config_path, kind);
    if (overrides.seed) cfg.master_seed = *overrides.seed;
    if (overrides.workers) {
      if (*overrides.workers < 1) throw ConfigError("--workers must be >= 1");
      cfg.workers = *overrides.workers;
    }
    if (overrides.output_dir) {
      cfg.output_dir = *overrides.output_dir;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
      cfg.output_dir = env;
    }
    dir = cfg.output_dir;

    const std::vector<CsvTable> tables = [&] {
      try {
        return execute(cfg);
      } catch (const InputError& e) {
        throw ConfigError(e.what());
      }
    }();

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output dir '" + dir.string() + "': " + ec.message());
    json artifacts = json::array();
    for (const CsvTable& t : tables) {
      const fs::path path = dir / t.name;
      write_file_atomic(path, render(t));
      written.push_back(path);
      result.files.push_back(path.string());
      artifacts.push_back(t.name);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {{"config_hash", cfg.hash()},
                           {"master_seed", cfg.master_seed},
                           {"probe", to_string(cfg.kind)},
                           {"wall_time_s", wall},
                           {"workers", cfg.workers},
                           {"artifacts", artifacts},
                           {"config", cfg.canonical()},
                           {"versions",
                            {{"critwin", kVersion},
                             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                           std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                           std::to_string(EIGEN_MINOR_VERSION)}}}};
    const fs::path mpath = dir / "manifest.json";
    write_file_atomic(mpath, manifest.dump(2) + "\n");
    written.push_back(mpath);
    result.files.push_back(mpath.string());
    result.exit_code = kExitOk;
    result.message = "wrote " + std::to_string(result.files.size()) + " files to " + dir.string();
  } catch (const ConfigError& e) {
    cleanup();
    result.exit_code = kExitConfig;
    result.message = std::string("config error: ") + e.what();
  } catch (const std::exception& e) {
    cleanup();
    result.exit_code = kExitNumeric;
    result.message = std::string("numeric error: ") + e.what();
  }
  return result;
}

}  // namespace critwin
