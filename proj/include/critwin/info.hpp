#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "critwin/lattice.hpp"
#include "critwin/mixture.hpp"
#include "critwin/schedule.hpp"

namespace critwin {

// I(A:C|B) of a Gaussian with covariance `cov`:
// 0.5 (log det S_{A|B} - log det S_{A|BC}), conditionals via Schur complements.
// Negative values within -1e-10 are clamped to 0.
double gaussian_cmi(const Eigen::MatrixXd& cov, const Tripartition& part);

// log det of the conditional covariance S_{A|B} (B may be empty).
double conditional_log_det(const Eigen::MatrixXd& cov, const SiteSet& a, const SiteSet& b);

struct CmiEstimate {
  double estimate;
  double std_error;
};

// Monte-Carlo E[log p(x_A | x_B, x_C) - log p(x_A | x_B)] over x ~ q_t, with
// every conditional evaluated exactly from subset mixture marginals.
CmiEstimate mixture_cmi_mc(const GaussianMixtureModel& m, const NoiseSchedule& s, double t,
                           const Tripartition& part, int n, std::uint64_t seed, int workers = 1);

struct MarkovFit {
  double xi;  // +inf when the fitted slope is >= 0
  double i0;
  double r_squared;
  int n_used;
};

struct CmiPoint {
  double r;
  double cmi;
};

inline constexpr double kCmiFloor = 1e-12;

// OLS of ln(cmi) on r after dropping points with cmi <= kCmiFloor.
MarkovFit markov_length_fit(std::span<const CmiPoint> points);

}  // namespace critwin
