#include "critwin/probes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "critwin/error.hpp"
#include "critwin/localscore.hpp"
#include "critwin/metrics.hpp"
#include "critwin/rng.hpp"
#include "critwin/sampler.hpp"

namespace critwin {

namespace {

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw InputError("empty time grid");
  for (double t : t_grid)
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("time grid value outside [0, 1]");
}

void check_samples(int n) {
  if (n < 2) throw InputError("need at least 2 samples per cell");
}

int steps_for_span(int n_steps, double span) {
  return std::max(1, static_cast<int>(std::ceil(n_steps * span - 1e-9)));
}

std::vector<Stream> make_streams(std::uint64_t seed, std::string_view tag, std::uint64_t cell,
                                 int n) {
  std::vector<Stream> rngs;
  rngs.reserve(n);
  for (int i = 0; i < n; ++i) rngs.emplace_back(derive_seed(seed, tag, cell, i));
  return rngs;
}

std::vector<Eigen::VectorXd> prior_draws(std::vector<Stream>& rngs, int n_sites) {
  std::vector<Eigen::VectorXd> states;
  states.reserve(rngs.size());
  for (auto& rng : rngs) states.push_back(rng.normal_vector(n_sites));
  return states;
}

// Generate n samples by running `policy` from t = 1 down to t = 0.
std::vector<Eigen::VectorXd> generate(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                      const DenoiserPolicy& policy, std::uint64_t seed,
                                      std::string_view tag, int n_samples, int n_steps,
                                      int workers) {
  auto rngs = make_streams(seed, tag, 0, n_samples);
  auto states = prior_draws(rngs, m.n_sites());
  return reverse_sde_euler_batch(m, s, policy, std::move(states), 1.0, 0.0, n_steps, rngs,
                                 workers);
}

std::vector<int> classify_all(const GaussianMixtureModel& m, const NoiseSchedule& s,
                              const std::vector<Eigen::VectorXd>& xs) {
  const auto slice = m.at(s.marginal(s.t_min()));
  std::vector<int> labels(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) labels[i] = slice->classify(xs[i]);
  return labels;
}

double frechet_bootstrap_stderr(const std::vector<Eigen::VectorXd>& a,
                                const std::vector<Eigen::VectorXd>& b, int n_boot,
                                std::uint64_t seed, int workers) {
  if (n_boot < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> reps(n_boot);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int r = 0; r < n_boot; ++r) {
    Stream rng(derive_seed(seed, "frechet-boot", 0, r));
    std::vector<Eigen::VectorXd> ra(a.size()), rb(b.size());
    for (auto& v : ra) v = a[rng.below(a.size())];
    for (auto& v : rb) v = b[rng.below(b.size())];
    reps[r] = frechet_gaussian(ra, rb);
  }
  double mean = 0.0;
  for (double v : reps) mean += v;
  mean /= n_boot;
  double ss = 0.0;
  for (double v : reps) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n_boot - 1));
}

ScanResult run_scan(const GaussianMixtureModel& m, const NoiseSchedule& s, int y,
                    std::span<const double> t_i_grid, std::uint64_t seed, const ScanOptions& opts,
                    const std::function<DenoiserPolicy(double)>& policy_at) {
  check_grid(t_i_grid);
  check_samples(opts.n_samples);
  m.check_class(y);
  const auto baseline_policy = DenoiserPolicy::constant(ScoreMode::cond(y), Scope::global());
  const auto baseline = generate(m, s, baseline_policy, seed, "scan-baseline", opts.n_samples,
                                 opts.n_steps, opts.workers);
  const std::vector<int> truth(opts.n_samples, y);
  const RateEstimate base_err = classifier_error(truth, classify_all(m, s, baseline));

  ScanResult out;
  out.baseline_error = base_err.p;
  out.baseline_error_std_error = base_err.std_error;
  out.points.reserve(t_i_grid.size());
  for (std::size_t c = 0; c < t_i_grid.size(); ++c) {
    const DenoiserPolicy policy = policy_at(t_i_grid[c]);
    policy.validate(m.n_classes());
    const auto xs =
        generate(m, s, policy, seed, "scan", opts.n_samples, opts.n_steps, opts.workers);
    const auto pred = classify_all(m, s, xs);
    const RateEstimate err = classifier_error(truth, pred);
    const double fd = frechet_gaussian(xs, baseline);
    const double fd_se = frechet_bootstrap_stderr(xs, baseline, opts.n_boot,
                                                  derive_seed(seed, "scan-boot", c, 0),
                                                  opts.workers);
    out.points.push_back({t_i_grid[c], err.p, err.std_error, fd, fd_se});
  }
  return out;
}

}  // namespace

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Training: return "training";
    case TrajectoryKind::SamplingCond: return "sampling_cond";
    case TrajectoryKind::SamplingUncond: return "sampling_uncond";
  }
  return "?";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "training") return TrajectoryKind::Training;
  if (name == "sampling_cond") return TrajectoryKind::SamplingCond;
  if (name == "sampling_uncond") return TrajectoryKind::SamplingUncond;
  throw ConfigError("unknown trajectory kind '" + name + "'");
}

std::vector<Eigen::VectorXd> trajectory_states(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                               TrajectoryKind kind, int y, double t, int n_samples,
                                               std::uint64_t seed, const ProbeExec& exec,
                                               const DenoiserPolicy* sampling_policy) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("trajectory time outside [0, 1]");
  m.check_class(y);
  const int n = m.n_sites();
  if (kind == TrajectoryKind::Training) {
    std::vector<Eigen::VectorXd> states(n_samples);
    for (int i = 0; i < n_samples; ++i) {
      Stream rng(derive_seed(seed, "traj-train", 0, i));
      const CleanSample cs = sample_clean(m, rng, y);
      states[i] = forward_noise(s, cs.x0, t, rng);
    }
    return states;
  }
  const DenoiserPolicy fallback = DenoiserPolicy::constant(
      kind == TrajectoryKind::SamplingCond ? ScoreMode::cond(y) : ScoreMode::uncond());
  const DenoiserPolicy& policy = sampling_policy ? *sampling_policy : fallback;
  auto rngs = make_streams(seed, kind == TrajectoryKind::SamplingCond ? "traj-cond" : "traj-uncond",
                           0, n_samples);
  auto states = prior_draws(rngs, n);
  if (t >= 1.0) return states;
  return reverse_sde_euler_batch(m, s, policy, std::move(states), 1.0, t,
                                 steps_for_span(exec.n_steps, 1.0 - t), rngs, exec.workers);
}

GapCurve conditioning_gap_curve(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                TrajectoryKind source, int y, std::span<const double> t_grid,
                                int n_samples, std::uint64_t seed, const ProbeExec& exec,
                                const DenoiserPolicy* sampling_policy) {
  check_grid(t_grid);
  check_samples(n_samples);
  m.check_class(y);
  GapCurve out;
  out.trajectory_kind = source;
  out.n_samples = n_samples;
  const double inv_n = 1.0 / m.n_sites();
  for (double t : t_grid) {
    const auto xs = trajectory_states(m, s, source, y, t, n_samples, seed, exec, sampling_policy);
    const auto slice = m.at(s.marginal(t));
    std::vector<double> gaps(n_samples);
#pragma omp parallel for schedule(static) num_threads(exec.workers)
    for (int i = 0; i < n_samples; ++i)
      gaps[i] = (slice->score_marginal(xs[i]) - slice->score_conditional(xs[i], y)).norm() * inv_n;
    const MeanEstimate est = mean_stderr(gaps);
    out.t_grid.push_back(t);
    out.mean.push_back(est.mean);
    out.std_error.push_back(est.std_error);
  }
  return out;
}

GapHeatmap locality_gap_heatmap(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                TrajectoryKind source, std::optional<int> cond,
                                std::span<const double> t_grid, std::span<const int> r_grid,
                                int n_samples, std::uint64_t seed, const ProbeExec& exec,
                                int trajectory_class, const DenoiserPolicy* sampling_policy) {
  check_grid(t_grid);
  check_samples(n_samples);
  if (r_grid.empty()) throw InputError("empty radius grid");
  for (int r : r_grid)
    if (r < 0) throw InputError("radius must be >= 0");
  if (cond) m.check_class(*cond);
  const int y = cond.value_or(trajectory_class);

  const auto nt = static_cast<Eigen::Index>(t_grid.size());
  const auto nr = static_cast<Eigen::Index>(r_grid.size());
  GapHeatmap out;
  out.t_grid.assign(t_grid.begin(), t_grid.end());
  out.r_grid.assign(r_grid.begin(), r_grid.end());
  out.cond = cond;
  out.mean.resize(nt, nr);
  out.std_error.resize(nt, nr);
  out.mean_sq.resize(nt, nr);
  out.std_error_sq.resize(nt, nr);
  const double inv_n = 1.0 / m.n_sites();

  for (Eigen::Index a = 0; a < nt; ++a) {
    const double t = t_grid[a];
    const auto xs = trajectory_states(m, s, source, y, t, n_samples, seed, exec, sampling_policy);
    const Marginal mg = s.marginal(t);
    const auto slice = m.at(mg);
    std::vector<Eigen::VectorXd> global(n_samples);
#pragma omp parallel for schedule(static) num_threads(exec.workers)
    for (int i = 0; i < n_samples; ++i)
      global[i] = cond ? slice->score_conditional(xs[i], *cond) : slice->score_marginal(xs[i]);

    for (Eigen::Index b = 0; b < nr; ++b) {
      const LocalScorer scorer(m, mg, r_grid[b]);
      std::vector<double> gap(n_samples), gap_sq(n_samples);
#pragma omp parallel for schedule(static) num_threads(exec.workers)
      for (int i = 0; i < n_samples; ++i) {
        const double d2 = (global[i] - scorer.score(xs[i], cond)).squaredNorm();
        gap_sq[i] = d2;
        gap[i] = std::sqrt(d2) * inv_n;
      }
      const MeanEstimate g = mean_stderr(gap);
      const MeanEstimate g2 = mean_stderr(gap_sq);
      out.mean(a, b) = g.mean;
      out.std_error(a, b) = g.std_error;
      out.mean_sq(a, b) = g2.mean;
      out.std_error_sq(a, b) = g2.std_error;
    }
  }
  return out;
}

ThresholdCurve forward_backward(const GaussianMixtureModel& m, const NoiseSchedule& s, Scope scope,
                                std::span<const double> t_grid, int n_clean, int n_noise,
                                int n_steps, std::uint64_t seed, int workers) {
  check_grid(t_grid);
  if (n_clean < 1 || n_noise < 1 || n_clean * n_noise < 2)
    throw InputError("forward_backward needs n_clean * n_noise >= 2");
  if (n_steps < 1) throw InputError("n_steps must be >= 1");

  std::vector<CleanSample> clean;
  clean.reserve(n_clean);
  for (int j = 0; j < n_clean; ++j) {
    Stream rng(derive_seed(seed, "fb-clean", 0, j));
    clean.push_back(sample_clean(m, rng));
  }
  const int total = n_clean * n_noise;
  std::vector<int> truth(total);
  for (int k = 0; k < total; ++k) truth[k] = clean[k / n_noise].y;

  const DenoiserPolicy policy = DenoiserPolicy::constant(ScoreMode::uncond(), scope);
  const double t_end = s.t_min();

  ThresholdCurve out;
  out.scope = scope;
  for (double t : t_grid) {
    std::vector<Stream> rngs;
    rngs.reserve(total);
    std::vector<Eigen::VectorXd> states;
    states.reserve(total);
    for (int k = 0; k < total; ++k) {
      rngs.emplace_back(derive_seed(seed, "fb-noise", k / n_noise, k % n_noise));
      states.push_back(forward_noise(s, clean[k / n_noise].x0, t, rngs.back()));
    }
    if (t > t_end) {
      const int steps = steps_for_span(n_steps, (t - t_end) / (1.0 - t_end));
      states = reverse_sde_euler_batch(m, s, policy, std::move(states), t, t_end, steps, rngs,
                                       workers);
    }
    const auto pred = classify_all(m, s, states);
    const RateEstimate err = classifier_error(truth, pred);
    double mse = 0.0;
    for (int k = 0; k < total; ++k) mse += mse_per_site(clean[k / n_noise].x0, states[k]);
    out.t_grid.push_back(t);
    out.error_rate.push_back(err.p);
    out.error_std_error.push_back(err.std_error);
    out.mse.push_back(mse / total);
  }
  return out;
}

ScanResult window_conditioning_scan(const GaussianMixtureModel& m, const NoiseSchedule& s, int y,
                                    double width, std::span<const double> t_i_grid,
                                    std::uint64_t seed, const ScanOptions& opts) {
  if (!(width > 0.0)) throw InputError("window width must be > 0");
  return run_scan(m, s, y, t_i_grid, seed, opts, [&](double t_i) {
    return DenoiserPolicy::windowed(t_i, t_i + width, ScoreMode::cond(y), Scope::global(),
                                    ScoreMode::uncond(), Scope::global());
  });
}

ScanResult window_locality_scan(const GaussianMixtureModel& m, const NoiseSchedule& s, int y,
                                double half_width, int r, std::span<const double> t_i_grid,
                                std::uint64_t seed, ScoreMode outside_mode,
                                const ScanOptions& opts) {
  if (!(half_width > 0.0)) throw InputError("window half width must be > 0");
  if (r < 0) throw InputError("radius must be >= 0");
  return run_scan(m, s, y, t_i_grid, seed, opts, [&](double t_i) {
    return DenoiserPolicy::windowed(t_i - half_width, t_i + half_width, ScoreMode::cond(y),
                                    Scope::global(), outside_mode, Scope::local(r));
  });
}

double critical_time(std::span<const double> t_grid, std::span<const double> values,
                     CriticalMethod method) {
  if (t_grid.size() != values.size()) throw InputError("grid and values differ in length");
  if (t_grid.empty()) throw ExtractionError("empty curve");
  for (double v : values)
    if (!std::isfinite(v)) throw ExtractionError("curve has non-finite values");

  std::vector<std::size_t> order(t_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return t_grid[a] < t_grid[b]; });

  if (method.kind == CriticalMethod::Kind::Crossing) {
    const double lv = method.level;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const double t0 = t_grid[order[k]], t1 = t_grid[order[k + 1]];
      const double v0 = values[order[k]] - lv, v1 = values[order[k + 1]] - lv;
      if (v0 == 0.0) return t0;
      if ((v0 < 0.0) != (v1 < 0.0) || v1 == 0.0) {
        if (v1 == 0.0) return t1;
        return t0 + (t1 - t0) * v0 / (v0 - v1);
      }
    }
    if (values[order.back()] == lv) return t_grid[order.back()];
    throw ExtractionError("curve never crosses level " + std::to_string(lv));
  }

  const bool want_max = method.kind == CriticalMethod::Kind::Argmax;
  std::size_t best = order[0];
  for (std::size_t k = 1; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (want_max ? values[i] > values[best] : values[i] < values[best]) best = i;
  }
  return t_grid[best];
}

double half_chance_level(int n_classes) {
  if (n_classes < 2) throw InputError("need at least 2 classes");
  return 0.5 * (n_classes - 1.0) / n_classes;
}

}  // namespace critwin
