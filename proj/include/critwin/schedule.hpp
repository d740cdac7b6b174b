#pragma once

#include <string>

namespace critwin {

enum class ScheduleKind { VpCosine, VpLinearBeta };

// Closed-form marginal coefficients of x_t = sqrt(alpha_bar) x0 + sqrt(sigma2) eps.
struct Marginal {
  double alpha_bar = 1.0;
  double sigma2 = 0.0;
};

struct ScheduleValues {
  double alpha_bar;
  double sigma2;
  double beta;  // -d ln(alpha_bar)/dt; f(x,t) = -beta x / 2, g^2 = beta
};

// Variance-preserving schedule on normalized time: t = 0 clean, t = 1 pure noise.
class NoiseSchedule {
 public:
  static NoiseSchedule cosine(double t_min = 1e-3, double t_max = 1.0 - 1e-3);
  static NoiseSchedule linear_beta(double beta_min = 0.1, double beta_max = 20.0,
                                   double t_min = 1e-3, double t_max = 1.0 - 1e-3);

  ScheduleKind kind() const { return kind_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }

  double clamp(double t) const;
  // Coefficients at t clamped to [t_min, t_max]; all finite.
  ScheduleValues eval(double t) const;
  // Exact (unclamped) marginal coefficients; finite on all of [0, 1].
  Marginal marginal(double t) const;

  std::string name() const;

 private:
  NoiseSchedule(ScheduleKind kind, double t_min, double t_max, double beta_min, double beta_max);
  void check_time(double t) const;

  ScheduleKind kind_;
  double t_min_;
  double t_max_;
  double beta_min_ = 0.0;
  double beta_max_ = 0.0;
};

struct ForwardMoments {
  double scale;
  double noise_std;
};

ForwardMoments forward_moments(const NoiseSchedule& s, double t);

}  // namespace critwin
