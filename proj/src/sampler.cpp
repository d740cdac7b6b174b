#include "critwin/sampler.hpp"

#include <cmath>

#include "critwin/error.hpp"

namespace critwin {

namespace {

void check_interval(double t_start, double t_end, int n_steps) {
  if (!(t_start <= 1.0 && t_end >= 0.0)) throw InputError("integration times outside [0, 1]");
  if (!(t_start > t_end)) throw InputError("reverse integration needs t_start > t_end");
  if (n_steps < 0) throw InputError("n_steps must be >= 0");
}

struct StepCoefficients {
  double dt;
  double beta;
  PolicyStep step;
};

StepCoefficients make_step(const GaussianMixtureModel& m, const NoiseSchedule& s,
                           const DenoiserPolicy& policy, double t_here, double t_next) {
  const auto [mode, scope] = policy.resolve(t_here);
  const double tc = s.clamp(t_here);
  return {t_here - t_next, s.eval(t_here).beta, PolicyStep(m, s.marginal(tc), mode, scope)};
}

// Drift of the probability-flow ODE, dx/dt.
Eigen::VectorXd flow_drift(const PolicyStep& step, double beta, const Eigen::VectorXd& x) {
  return -0.5 * beta * (x + step.score(x));
}

void euler_maruyama_update(const StepCoefficients& c, Eigen::VectorXd& x, Stream& rng,
                           Eigen::VectorXd& noise) {
  const Eigen::VectorXd sc = c.step.score(x);
  rng.fill_normal(noise);
  x += c.dt * (0.5 * c.beta * x + c.beta * sc) + std::sqrt(c.beta * c.dt) * noise;
}

void heun_update(const StepCoefficients& here, const PolicyStep& next_step, double beta_next,
                 Eigen::VectorXd& x) {
  const Eigen::VectorXd f0 = flow_drift(here.step, here.beta, x);
  const Eigen::VectorXd pred = x - here.dt * f0;
  const Eigen::VectorXd f1 = flow_drift(next_step, beta_next, pred);
  x -= 0.5 * here.dt * (f0 + f1);
}

// Second Heun stage re-uses the step's resolved policy at the next grid time.
PolicyStep heun_stage(const GaussianMixtureModel& m, const NoiseSchedule& s,
                      const PolicyStep& here, double t_next) {
  return PolicyStep(m, s.marginal(s.clamp(t_next)), here.mode(), here.scope());
}

}  // namespace

Eigen::VectorXd forward_noise(const NoiseSchedule& s, const Eigen::VectorXd& x0, double t,
                              Stream& rng) {
  const ForwardMoments fm = forward_moments(s, t);
  const Eigen::VectorXd eps = rng.normal_vector(x0.size());
  return fm.scale * x0 + fm.noise_std * eps;
}

std::vector<double> time_grid(double t_start, double t_end, int n_steps) {
  std::vector<double> grid(static_cast<std::size_t>(n_steps) + 1);
  if (n_steps == 0) {
    grid[0] = t_start;
    return grid;
  }
  const double dt = (t_start - t_end) / n_steps;
  for (int k = 0; k < n_steps; ++k) grid[k] = t_start - k * dt;
  grid[n_steps] = t_end;
  return grid;
}

Trajectory reverse_sde_euler(const GaussianMixtureModel& m, const NoiseSchedule& s,
                             const DenoiserPolicy& policy, const Eigen::VectorXd& x_init,
                             double t_start, double t_end, int n_steps, Stream& rng) {
  check_interval(t_start, t_end, n_steps);
  if (x_init.size() != m.n_sites()) throw InputError("initial state length != n_sites");
  Trajectory traj;
  traj.times = time_grid(t_start, t_end, n_steps);
  traj.policy_id = policy.id();
  traj.seed = rng.seed();
  traj.states.reserve(traj.times.size());
  traj.states.push_back(x_init);
  Eigen::VectorXd x = x_init;
  Eigen::VectorXd noise(x.size());
  for (int k = 0; k < n_steps; ++k) {
    const StepCoefficients c = make_step(m, s, policy, traj.times[k], traj.times[k + 1]);
    euler_maruyama_update(c, x, rng, noise);
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory reverse_ode_heun(const GaussianMixtureModel& m, const NoiseSchedule& s,
                            const DenoiserPolicy& policy, const Eigen::VectorXd& x_init,
                            double t_start, double t_end, int n_steps) {
  check_interval(t_start, t_end, n_steps);
  if (x_init.size() != m.n_sites()) throw InputError("initial state length != n_sites");
  Trajectory traj;
  traj.times = time_grid(t_start, t_end, n_steps);
  traj.policy_id = policy.id();
  traj.states.reserve(traj.times.size());
  traj.states.push_back(x_init);
  Eigen::VectorXd x = x_init;
  for (int k = 0; k < n_steps; ++k) {
    const double t_next = traj.times[k + 1];
    const StepCoefficients c = make_step(m, s, policy, traj.times[k], t_next);
    const PolicyStep next = heun_stage(m, s, c.step, t_next);
    heun_update(c, next, s.eval(t_next).beta, x);
    traj.states.push_back(x);
  }
  return traj;
}

std::vector<Eigen::VectorXd> reverse_sde_euler_batch(const GaussianMixtureModel& m,
                                                     const NoiseSchedule& s,
                                                     const DenoiserPolicy& policy,
                                                     std::vector<Eigen::VectorXd> states,
                                                     double t_start, double t_end, int n_steps,
                                                     std::span<Stream> rngs, int workers) {
  check_interval(t_start, t_end, n_steps);
  if (rngs.size() != states.size()) throw InputError("one stream per state required");
  const auto grid = time_grid(t_start, t_end, n_steps);
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  for (int k = 0; k < n_steps; ++k) {
    const StepCoefficients c = make_step(m, s, policy, grid[k], grid[k + 1]);
#pragma omp parallel num_threads(workers > 0 ? workers : 1)
    {
      Eigen::VectorXd noise(m.n_sites());
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) euler_maruyama_update(c, states[i], rngs[i], noise);
    }
  }
  return states;
}

std::vector<Eigen::VectorXd> reverse_ode_heun_batch(const GaussianMixtureModel& m,
                                                    const NoiseSchedule& s,
                                                    const DenoiserPolicy& policy,
                                                    std::vector<Eigen::VectorXd> states,
                                                    double t_start, double t_end, int n_steps,
                                                    int workers) {
  check_interval(t_start, t_end, n_steps);
  const auto grid = time_grid(t_start, t_end, n_steps);
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  for (int k = 0; k < n_steps; ++k) {
    const StepCoefficients c = make_step(m, s, policy, grid[k], grid[k + 1]);
    const PolicyStep next = heun_stage(m, s, c.step, grid[k + 1]);
    const double beta_next = s.eval(grid[k + 1]).beta;
#pragma omp parallel for schedule(static) num_threads(workers > 0 ? workers : 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) heun_update(c, next, beta_next, states[i]);
  }
  return states;
}

}  // namespace critwin
