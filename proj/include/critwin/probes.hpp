#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "critwin/mixture.hpp"
#include "critwin/policy.hpp"
#include "critwin/schedule.hpp"
#include "critwin/score_types.hpp"

namespace critwin {

enum class TrajectoryKind { Training, SamplingCond, SamplingUncond };
std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

struct ProbeExec {
  int workers = 1;
  int n_steps = 200;  // reverse-SDE steps for sampling trajectories / integrated probes
};

// States at time t for n samples. Sample i uses the same stream at every t
// (common random numbers across the grid). Sampling trajectories are
// resimulated from t = 1 with a step count proportional to 1 - t.
std::vector<Eigen::VectorXd> trajectory_states(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                               TrajectoryKind kind, int y, double t, int n_samples,
                                               std::uint64_t seed, const ProbeExec& exec,
                                               const DenoiserPolicy* sampling_policy = nullptr);

struct GapCurve {
  std::vector<double> t_grid;
  std::vector<double> mean;
  std::vector<double> std_error;
  TrajectoryKind trajectory_kind = TrajectoryKind::Training;
  int n_samples = 0;
};

// ||s_uncond - s_cond(y)||_2 / N along the requested trajectory.
GapCurve conditioning_gap_curve(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                TrajectoryKind source, int y, std::span<const double> t_grid,
                                int n_samples, std::uint64_t seed, const ProbeExec& exec = {},
                                const DenoiserPolicy* sampling_policy = nullptr);

struct GapHeatmap {
  std::vector<double> t_grid;
  std::vector<int> r_grid;
  Eigen::MatrixXd mean;       // (t, r): mean of ||s - s_loc||_2 / N
  Eigen::MatrixXd std_error;
  Eigen::MatrixXd mean_sq;    // (t, r): mean of ||s - s_loc||_2^2
  Eigen::MatrixXd std_error_sq;
  std::optional<int> cond;
};

// s is the conditional score of class y when cond is set, else the marginal
// score. States come from the `source` trajectory of class y (cond, or 0).
GapHeatmap locality_gap_heatmap(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                TrajectoryKind source, std::optional<int> cond,
                                std::span<const double> t_grid, std::span<const int> r_grid,
                                int n_samples, std::uint64_t seed, const ProbeExec& exec = {},
                                int trajectory_class = 0,
                                const DenoiserPolicy* sampling_policy = nullptr);

struct ThresholdCurve {
  std::vector<double> t_grid;
  std::vector<double> error_rate;
  std::vector<double> error_std_error;
  std::vector<double> mse;
  Scope scope;
};

// Noise clean samples to t, denoise unconditionally (given scope) to t_min,
// and classify; error is the class-mismatch rate.
ThresholdCurve forward_backward(const GaussianMixtureModel& m, const NoiseSchedule& s, Scope scope,
                                std::span<const double> t_grid, int n_clean, int n_noise,
                                int n_steps, std::uint64_t seed, int workers = 1);

struct ScanPoint {
  double t_i;
  double error;
  double error_std_error;
  double frechet;
  double frechet_std_error;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  double baseline_error = 0.0;
  double baseline_error_std_error = 0.0;
};

struct ScanOptions {
  int n_samples = 500;
  int n_steps = 200;
  int n_boot = 200;
  int workers = 1;
};

// Conditioning cond(y)-global on [t_i, t_i + width] (clipped at 1), unconditional
// global elsewhere. Metrics against an always-conditioned baseline.
ScanResult window_conditioning_scan(const GaussianMixtureModel& m,
                                      const NoiseSchedule& s, int y, double width,
                                      std::span<const double> t_i_grid, std::uint64_t seed,
                                      const ScanOptions& opts);

// Global cond(y) on [t_i - hw, t_i + hw] (clipped to (0, 1]), outside_mode with
// local(r) scope elsewhere. Baseline: always global, always conditioned.
ScanResult window_locality_scan(const GaussianMixtureModel& m, const NoiseSchedule& s, int y,
                                double half_width, int r, std::span<const double> t_i_grid,
                                std::uint64_t seed, ScoreMode outside_mode,
                                const ScanOptions& opts);

struct CriticalMethod {
  enum class Kind { Argmax, Argmin, Crossing };
  Kind kind = Kind::Argmax;
  double level = 0.0;

  static CriticalMethod argmax() { return {Kind::Argmax, 0.0}; }
  static CriticalMethod argmin() { return {Kind::Argmin, 0.0}; }
  static CriticalMethod crossing(double level) { return {Kind::Crossing, level}; }
};

// argmax/argmin: grid point, ties to the smallest t. crossing: linear
// interpolation of the first bracketing pair in increasing t.
double critical_time(std::span<const double> t_grid, std::span<const double> values,
                     CriticalMethod method);

// Error level halfway to chance, 0.5 (K - 1) / K; the "50% crossing" of an
// error-vs-t curve is its crossing of this level.
double half_chance_level(int n_classes);

}  // namespace critwin
