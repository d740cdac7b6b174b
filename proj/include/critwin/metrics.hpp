#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace critwin {

struct RateEstimate {
  double p;
  double std_error;
};

// Mismatch fraction with Bernoulli one-sigma error sqrt(p (1 - p) / n).
RateEstimate classifier_error(std::span<const int> true_labels, std::span<const int> pred_labels);

double mse_per_site(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased (n - 1) normalization
};
GaussianFit fit_gaussian(std::span<const Eigen::VectorXd> samples);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2}). Each
// covariance is ridged by ridge * mean(diag) before the trace term.
double frechet_gaussian(std::span<const Eigen::VectorXd> samples_a,
                        std::span<const Eigen::VectorXd> samples_b, double ridge = 1e-6);
double frechet_from_fits(const GaussianFit& a, const GaussianFit& b, double ridge = 1e-6);

// Standard deviation of `statistic` over n_boot resamples (with replacement)
// of the index set {0, ..., n-1}. Replicate r draws from its own derived stream.
double bootstrap_stderr(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                        int n_boot, std::uint64_t seed);
double bootstrap_ci(std::span<const double> samples,
                    const std::function<double(std::span<const double>)>& statistic, int n_boot,
                    std::uint64_t seed);

// Mean and standard error of the mean, reduced in index order.
struct MeanEstimate {
  double mean;
  double std_error;
};
MeanEstimate mean_stderr(std::span<const double> values);

}  // namespace critwin
