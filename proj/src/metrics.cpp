#include "critwin/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "critwin/error.hpp"
#include "critwin/rng.hpp"

namespace critwin {

RateEstimate classifier_error(std::span<const int> true_labels, std::span<const int> pred_labels) {
  if (true_labels.size() != pred_labels.size()) throw InputError("label vectors differ in length");
  if (true_labels.empty()) throw InputError("classifier_error needs at least one label");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < true_labels.size(); ++i) wrong += true_labels[i] != pred_labels[i];
  const double n = static_cast<double>(true_labels.size());
  const double p = static_cast<double>(wrong) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

double mse_per_site(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size()) throw InputError("mse_per_site: length mismatch");
  if (x.size() == 0) return 0.0;
  return (x - x_hat).squaredNorm() / static_cast<double>(x.size());
}

GaussianFit fit_gaussian(std::span<const Eigen::VectorXd> samples) {
  if (samples.size() < 2) throw InputError("Gaussian fit needs at least two samples");
  const Eigen::Index d = samples[0].size();
  GaussianFit fit{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (const auto& s : samples) {
    if (s.size() != d) throw InputError("samples differ in dimension");
    fit.mean += s;
  }
  fit.mean /= static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const Eigen::VectorXd c = s - fit.mean;
    fit.cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  fit.cov = fit.cov.selfadjointView<Eigen::Lower>();
  fit.cov /= static_cast<double>(samples.size() - 1);
  return fit;
}

double frechet_from_fits(const GaussianFit& a, const GaussianFit& b, double ridge) {
  if (a.mean.size() != b.mean.size()) throw InputError("Frechet: dimension mismatch");
  auto ridged = [&](const Eigen::MatrixXd& c) {
    Eigen::MatrixXd r = c;
    r.diagonal().array() += ridge * c.diagonal().mean();
    return r;
  };
  const Eigen::MatrixXd ca = ridged(a.cov);
  const Eigen::MatrixXd cb = ridged(b.cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(ca);
  const Eigen::VectorXd la = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd sqrt_a = eig_a.eigenvectors() * la.asDiagonal() * eig_a.eigenvectors().transpose();
  Eigen::MatrixXd inner = sqrt_a * cb * sqrt_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_inner(inner, Eigen::EigenvaluesOnly);
  const double tr_sqrt = eig_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return (a.mean - b.mean).squaredNorm() + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
}

double frechet_gaussian(std::span<const Eigen::VectorXd> samples_a,
                        std::span<const Eigen::VectorXd> samples_b, double ridge) {
  return frechet_from_fits(fit_gaussian(samples_a), fit_gaussian(samples_b), ridge);
}

double bootstrap_stderr(std::size_t n,
                        const std::function<double(std::span<const std::size_t>)>& statistic,
                        int n_boot, std::uint64_t seed) {
  if (n == 0) throw InputError("bootstrap needs samples");
  if (n_boot < 100) throw InputError("bootstrap needs n_boot >= 100");
  std::vector<double> reps(static_cast<std::size_t>(n_boot));
  std::vector<std::size_t> idx(n);
  for (int r = 0; r < n_boot; ++r) {
    Stream rng(derive_seed(seed, "bootstrap", 0, static_cast<std::uint64_t>(r)));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    reps[static_cast<std::size_t>(r)] = statistic(idx);
  }
  double mean = 0.0;
  for (double v : reps) mean += v;
  mean /= n_boot;
  double ss = 0.0;
  for (double v : reps) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n_boot - 1));
}

double bootstrap_ci(std::span<const double> samples,
                    const std::function<double(std::span<const double>)>& statistic, int n_boot,
                    std::uint64_t seed) {
  std::vector<double> buf(samples.size());
  return bootstrap_stderr(
      samples.size(),
      [&](std::span<const std::size_t> idx) {
        for (std::size_t k = 0; k < idx.size(); ++k) buf[k] = samples[idx[k]];
        return statistic(buf);
      },
      n_boot, seed);
}

MeanEstimate mean_stderr(std::span<const double> values) {
  if (values.empty()) throw InputError("mean of an empty sample");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace critwin
