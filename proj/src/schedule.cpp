#include "critwin/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "critwin/error.hpp"

namespace critwin {

NoiseSchedule::NoiseSchedule(ScheduleKind kind, double t_min, double t_max, double beta_min,
                             double beta_max)
    : kind_(kind), t_min_(t_min), t_max_(t_max), beta_min_(beta_min), beta_max_(beta_max) {
  if (!(t_min > 0.0 && t_min < t_max && t_max < 1.0))
    throw InputError("schedule clamp must satisfy 0 < t_min < t_max < 1");
  if (kind == ScheduleKind::VpLinearBeta && !(beta_min > 0.0 && beta_max >= beta_min))
    throw InputError("linear-beta schedule needs 0 < beta_min <= beta_max");
}

NoiseSchedule NoiseSchedule::cosine(double t_min, double t_max) {
  return NoiseSchedule(ScheduleKind::VpCosine, t_min, t_max, 0.0, 0.0);
}

NoiseSchedule NoiseSchedule::linear_beta(double beta_min, double beta_max, double t_min,
                                         double t_max) {
  return NoiseSchedule(ScheduleKind::VpLinearBeta, t_min, t_max, beta_min, beta_max);
}

void NoiseSchedule::check_time(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("time outside [0, 1]");
}

double NoiseSchedule::clamp(double t) const { return std::clamp(t, t_min_, t_max_); }

Marginal NoiseSchedule::marginal(double t) const {
  check_time(t);
  if (kind_ == ScheduleKind::VpCosine) {
    // Endpoints are pinned so that t = 0 and t = 1 are exactly clean / pure noise.
    if (t == 0.0) return {1.0, 0.0};
    if (t == 1.0) return {0.0, 1.0};
    const double c = std::cos(0.5 * std::numbers::pi * t);
    const double s = std::sin(0.5 * std::numbers::pi * t);
    return {c * c, s * s};
  }
  const double integral = beta_min_ * t + 0.5 * (beta_max_ - beta_min_) * t * t;
  return {std::exp(-integral), -std::expm1(-integral)};
}

ScheduleValues NoiseSchedule::eval(double t) const {
  check_time(t);
  const double tc = clamp(t);
  const Marginal mg = marginal(tc);
  double beta;
  if (kind_ == ScheduleKind::VpCosine) {
    beta = std::numbers::pi * std::tan(0.5 * std::numbers::pi * tc);
  } else {
    beta = beta_min_ + tc * (beta_max_ - beta_min_);
  }
  return {mg.alpha_bar, mg.sigma2, beta};
}

std::string NoiseSchedule::name() const {
  return kind_ == ScheduleKind::VpCosine ? "vp-cosine" : "vp-linear-beta";
}

ForwardMoments forward_moments(const NoiseSchedule& s, double t) {
  const Marginal mg = s.marginal(t);
  return {std::sqrt(mg.alpha_bar), std::sqrt(mg.sigma2)};
}

}  // namespace critwin
