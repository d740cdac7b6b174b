#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "critwin/lattice.hpp"
#include "critwin/mixture.hpp"
#include "critwin/policy.hpp"
#include "critwin/probes.hpp"
#include "critwin/schedule.hpp"
#include "critwin/score_types.hpp"

namespace critwin {

enum class ProbeKind { ScoreGap, ForwardBackward, WindowCond, WindowLocal, Cmi };
std::string to_string(ProbeKind kind);
ProbeKind probe_kind_from_string(const std::string& name);

enum class MeanPattern { Constant, Sinusoidal };

inline constexpr double kDefaultSiteSnr = 0.1;

struct ModelSpec {
  LatticeSpec lattice = LatticeSpec::ring(64);
  std::vector<double> priors{0.5, 0.5};
  MeanPattern pattern = MeanPattern::Constant;
  // constant: mu_y = sign_y * m; sinusoidal: mu_y(i) = m cos(2 pi f_y u_i + phase_y),
  // u_i the site's first coordinate divided by the extent.
  std::vector<double> signs{1.0, -1.0};
  std::vector<double> frequencies;
  std::vector<double> phases;
  std::optional<double> m;
  std::optional<double> site_snr;  // m = sqrt(site_snr * Sigma_ii) when m is absent;
                                   // kDefaultSiteSnr when both are absent
  double kappa = 1.0;
  double lambda = 4.0;
};

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::VpCosine;
  double t_min = 1e-3;
  double t_max = 1.0 - 1e-3;
  double beta_min = 0.1;
  double beta_max = 20.0;
};

struct ScoreGapSpec {
  int y = 0;
  TrajectoryKind trajectory = TrajectoryKind::Training;
  std::vector<double> t_grid;
  std::vector<int> r_grid;
  bool cond = true;
  int n_samples = 500;
  int n_steps = 200;
  std::optional<DenoiserPolicy> sampling_policy;
};

struct ForwardBackwardSpec {
  std::vector<Scope> scopes{Scope::global()};
  std::vector<double> t_grid;
  int n_clean = 100;
  int n_noise = 5;
  int n_steps = 200;
};

struct WindowCondSpec {
  int y = 0;
  double width = 0.1;
  std::vector<double> t_i_grid;
  ScanOptions scan;
};

struct WindowLocalSpec {
  int y = 0;
  double half_width = 0.2;
  int r = 2;
  ScoreMode outside_mode;
  std::vector<double> t_i_grid;
  ScanOptions scan;
};

struct CmiSpec {
  std::vector<double> t_grid;
  std::vector<int> r_grid;
  std::vector<int> a_sites{0};
  int n = 2000;
};

struct ExperimentConfig {
  ModelSpec model;
  ScheduleSpec schedule;
  ProbeKind kind = ProbeKind::ScoreGap;
  ScoreGapSpec score_gap;
  ForwardBackwardSpec fb;
  WindowCondSpec window_cond;
  WindowLocalSpec window_local;
  CmiSpec cmi;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  int workers = 1;

  // Fully defaulted canonical form; hashing ignores output_dir and workers.
  nlohmann::json canonical() const;
  std::string hash() const;
};

// Parse and validate. `expected` pins the probe kind (the CLI subcommand);
// a mismatching "probe.kind" is an error. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<ProbeKind> expected = {});
ExperimentConfig load_config(const std::string& path, std::optional<ProbeKind> expected = {});

GaussianMixtureModel build_model(const ModelSpec& spec);
NoiseSchedule build_schedule(const ScheduleSpec& spec);

// {"start", "stop", "step"} (inclusive) or an explicit array.
std::vector<double> parse_grid(const nlohmann::json& node, const std::string& what);

}  // namespace critwin
