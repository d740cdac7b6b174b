#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "critwin/mixture.hpp"
#include "critwin/policy.hpp"
#include "critwin/rng.hpp"
#include "critwin/schedule.hpp"

namespace critwin {

struct Trajectory {
  std::vector<double> times;  // strictly decreasing
  std::vector<Eigen::VectorXd> states;
  std::string policy_id;
  std::uint64_t seed = 0;
};

// x_t = sqrt(ab(t)) x0 + sqrt(s2(t)) eps, exact (unclamped) coefficients.
Eigen::VectorXd forward_noise(const NoiseSchedule& s, const Eigen::VectorXd& x0, double t,
                              Stream& rng);

// Uniform grid t_k = t_start - k (t_start - t_end) / n_steps, last point pinned to t_end.
std::vector<double> time_grid(double t_start, double t_end, int n_steps);

// Serial reference integrators. Coefficients and scores are evaluated at the
// clamped time; the policy is resolved at each step's starting time.
//   SDE: x <- x + dt [beta/2 x + beta s(x,t)] + sqrt(beta dt) xi
//   ODE: dx/dt = -beta/2 (x + s(x,t)), Heun (explicit trapezoid) backwards in time
Trajectory reverse_sde_euler(const GaussianMixtureModel& m, const NoiseSchedule& s,
                             const DenoiserPolicy& policy, const Eigen::VectorXd& x_init,
                             double t_start, double t_end, int n_steps, Stream& rng);
Trajectory reverse_ode_heun(const GaussianMixtureModel& m, const NoiseSchedule& s,
                            const DenoiserPolicy& policy, const Eigen::VectorXd& x_init,
                            double t_start, double t_end, int n_steps);

// OpenMP batch kernels: every sample advances through the same grid with its
// own stream, so results match the serial reference bit for bit regardless
// of worker count. Returns terminal states.
std::vector<Eigen::VectorXd> reverse_sde_euler_batch(const GaussianMixtureModel& m,
                                                     const NoiseSchedule& s,
                                                     const DenoiserPolicy& policy,
                                                     std::vector<Eigen::VectorXd> states,
                                                     double t_start, double t_end, int n_steps,
                                                     std::span<Stream> rngs, int workers);
std::vector<Eigen::VectorXd> reverse_ode_heun_batch(const GaussianMixtureModel& m,
                                                    const NoiseSchedule& s,
                                                    const DenoiserPolicy& policy,
                                                    std::vector<Eigen::VectorXd> states,
                                                    double t_start, double t_end, int n_steps,
                                                    int workers);

}  // namespace critwin
