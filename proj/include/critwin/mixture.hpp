#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "critwin/lattice.hpp"
#include "critwin/rng.hpp"
#include "critwin/schedule.hpp"
#include "critwin/score_types.hpp"

namespace critwin {

class NoisedMixture;

// Sparse Cholesky of an SPD matrix with its log-determinant.
class SparseFactor {
 public:
  explicit SparseFactor(const Eigen::SparseMatrix<double>& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }
  // Returns L^{-T} P z, a draw from N(0, A^{-1}) when z is standard normal.
  Eigen::VectorXd inverse_sqrt_apply(const Eigen::VectorXd& z) const;
  double log_det() const { return log_det_; }

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  double log_det_ = 0.0;
};

// K-class Gaussian mixture on a periodic lattice with shared GMRF covariance
// Sigma = Q^{-1}, Q = kappa I + lambda Laplacian.
class GaussianMixtureModel {
 public:
  GaussianMixtureModel(LatticeSpec lattice, std::vector<double> priors,
                       std::vector<Eigen::VectorXd> means, double kappa, double lambda);

  const LatticeSpec& lattice() const { return lattice_; }
  int n_sites() const { return lattice_.n_sites(); }
  int n_classes() const { return static_cast<int>(priors_.size()); }
  const std::vector<double>& priors() const { return priors_; }
  const std::vector<double>& log_priors() const { return log_priors_; }
  const Eigen::VectorXd& mean(int y) const;
  double kappa() const { return kappa_; }
  double lambda() const { return lambda_; }

  const Eigen::SparseMatrix<double>& precision() const { return precision_; }
  const SparseFactor& precision_factor() const { return *precision_factor_; }

  // Entries of Sigma = Q^{-1}. Q is translation invariant, so one solved
  // column determines the whole matrix.
  double covariance(int i, int j) const {
    return stationary_column_[lattice_.offset_index(i, j)];
  }
  Eigen::MatrixXd covariance_block(std::span<const int> sites) const;
  // Dense Sigma; only intended for oracle checks on small lattices.
  Eigen::MatrixXd dense_covariance() const;

  // Noised mixture q_t with the given marginal coefficients, cached by alpha_bar.
  std::shared_ptr<const NoisedMixture> at(Marginal mg) const;

  void check_class(int y) const;

 private:
  LatticeSpec lattice_;
  std::vector<double> priors_;
  std::vector<double> log_priors_;
  std::vector<Eigen::VectorXd> means_;
  double kappa_;
  double lambda_;
  Eigen::SparseMatrix<double> precision_;
  std::shared_ptr<const SparseFactor> precision_factor_;
  Eigen::VectorXd stationary_column_;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<const NoisedMixture>> cache_;
};

// q_t = sum_y pi_y N(sqrt(ab) mu_y, Sigma_t), Sigma_t = ab Sigma + s2 I.
// Sigma_t^{-1} = (ab I + s2 Q)^{-1} Q, applied with one sparse solve.
class NoisedMixture {
 public:
  NoisedMixture(const GaussianMixtureModel& model, Marginal mg);

  const GaussianMixtureModel& model() const { return *model_; }
  Marginal marginal() const { return mg_; }
  const Eigen::VectorXd& scaled_mean(int y) const { return scaled_means_[y]; }

  Eigen::VectorXd apply_precision(const Eigen::VectorXd& v) const;
  double log_det_cov() const { return log_det_cov_; }

  // log pi_y + log N(x; sqrt(ab) mu_y, Sigma_t) for every class.
  Eigen::VectorXd class_log_joint(const Eigen::VectorXd& x) const;
  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd posterior(const Eigen::VectorXd& x) const;
  Eigen::VectorXd score_conditional(const Eigen::VectorXd& x, int y) const;
  Eigen::VectorXd score_marginal(const Eigen::VectorXd& x) const;
  Eigen::VectorXd score_cfg(const Eigen::VectorXd& x, int y, double w) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x, const ScoreMode& mode) const;
  int classify(const Eigen::VectorXd& x) const;

 private:
  const GaussianMixtureModel* model_;
  Marginal mg_;
  std::unique_ptr<SparseFactor> factor_;  // ab I + s2 Q
  std::vector<Eigen::VectorXd> scaled_means_;
  double log_det_cov_ = 0.0;
};

// Marginal of q_t on a subset S of sites: a K-component mixture with means
// sqrt(ab) mu_y[S] and dense covariance Sigma_t[S,S].
class SubsetMixture {
 public:
  SubsetMixture(const GaussianMixtureModel& model, Marginal mg, SiteSet sites);

  const SiteSet& sites() const { return sites_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(sites_.size()); }
  Eigen::VectorXd gather(const Eigen::VectorXd& x) const;

  // Per-class log pi_y + log N on the subset; x_s is already gathered.
  Eigen::VectorXd class_log_joint(const Eigen::VectorXd& x_s) const;
  double log_density(const Eigen::VectorXd& x_s) const;
  // Gradient of the subset log density w.r.t. x_s (mixture or single class).
  Eigen::VectorXd gradient(const Eigen::VectorXd& x_s, std::optional<int> cond) const;
  // Single entry of the gradient, at subset position pos.
  double gradient_entry(const Eigen::VectorXd& x_s, Eigen::Index pos,
                        std::optional<int> cond) const;

 private:
  const GaussianMixtureModel* model_;
  SiteSet sites_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd precision_;
  std::vector<Eigen::VectorXd> scaled_means_;
  double log_norm_ = 0.0;  // -0.5 (n log 2 pi + log det)
};

double log_sum_exp(const Eigen::VectorXd& v);
Eigen::VectorXd softmax(const Eigen::VectorXd& v);

struct CleanSample {
  Eigen::VectorXd x0;
  int y;
};

// Entry points taking a time; t is mapped through the schedule without clamping.
CleanSample sample_clean(const GaussianMixtureModel& m, Stream& rng, std::optional<int> y = {});
double log_density(const GaussianMixtureModel& m, const NoiseSchedule& s, const Eigen::VectorXd& x,
                   double t);
ScoreEval score_conditional(const GaussianMixtureModel& m, const NoiseSchedule& s,
                            const Eigen::VectorXd& x, double t, int y);
Eigen::VectorXd posterior(const GaussianMixtureModel& m, const NoiseSchedule& s,
                          const Eigen::VectorXd& x, double t);
ScoreEval score_marginal(const GaussianMixtureModel& m, const NoiseSchedule& s,
                         const Eigen::VectorXd& x, double t);
ScoreEval score_cfg(const GaussianMixtureModel& m, const NoiseSchedule& s, const Eigen::VectorXd& x,
                    double t, int y, double w);
int bayes_classify(const GaussianMixtureModel& m, const NoiseSchedule& s, const Eigen::VectorXd& x,
                   double t);

// Symmetric two-class ring model mu_{0,1} = +/- m 1 (default benchmark).
GaussianMixtureModel symmetric_ring_model(int n_sites, double m, double kappa, double lambda);
// Standard deviation scale used to express amplitudes as per-site SNR: m^2 / Sigma_ii.
double site_variance(const GaussianMixtureModel& model);

}  // namespace critwin
