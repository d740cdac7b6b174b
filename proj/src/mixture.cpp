#include "critwin/mixture.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "critwin/error.hpp"

namespace critwin {

namespace {

constexpr std::size_t kMaxCachedSlices = 4096;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Eigen::SparseMatrix<double> build_precision(const LatticeSpec& lattice, double kappa, double lambda) {
  const int n = lattice.n_sites();
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < n; ++i) {
    const std::vector<int> nb = lattice.neighbors(i);
    entries.emplace_back(i, i, kappa + lambda * static_cast<double>(nb.size()));
    for (int j : nb) entries.emplace_back(i, j, -lambda);
  }
  Eigen::SparseMatrix<double> q(n, n);
  q.setFromTriplets(entries.begin(), entries.end());
  return q;
}

}  // namespace

std::string ScoreMode::label() const {
  switch (kind) {
    case Kind::Uncond:
      return "uncond";
    case Kind::Cond:
      return "cond(" + std::to_string(y) + ")";
    case Kind::Cfg: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "cfg(%d,%.9g)", y, w);
      return buf;
    }
  }
  return "?";
}

std::string Scope::label() const {
  return is_global() ? "global" : "local(" + std::to_string(radius) + ")";
}

SparseFactor::SparseFactor(const Eigen::SparseMatrix<double>& a) {
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) throw NumericError("sparse Cholesky failed: matrix not SPD");
  const auto& l = llt_.matrixL();
  Eigen::SparseMatrix<double> lower = l;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) acc += std::log(lower.coeff(i, i));
  log_det_ = 2.0 * acc;
}

Eigen::VectorXd SparseFactor::inverse_sqrt_apply(const Eigen::VectorXd& z) const {
  // P A P^T = L L^T  =>  x = P^T L^{-T} z has covariance A^{-1}.
  const Eigen::VectorXd w = llt_.matrixU().solve(z);
  return llt_.permutationPinv() * w;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  Eigen::VectorXd e = (v.array() - mx).exp();
  return e / e.sum();
}

GaussianMixtureModel::GaussianMixtureModel(LatticeSpec lattice, std::vector<double> priors,
                                           std::vector<Eigen::VectorXd> means, double kappa,
                                           double lambda)
    : lattice_(lattice),
      priors_(std::move(priors)),
      means_(std::move(means)),
      kappa_(kappa),
      lambda_(lambda) {
  if (priors_.empty()) throw InputError("mixture needs at least one class");
  if (priors_.size() != means_.size()) throw InputError("priors and means differ in length");
  double total = 0.0;
  for (double p : priors_) {
    if (!(p > 0.0)) throw InputError("class priors must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("class priors must sum to 1");
  for (const auto& mu : means_)
    if (mu.size() != lattice_.n_sites()) throw InputError("class mean length != n_sites");
  if (!(kappa_ > 0.0) || !(lambda_ >= 0.0)) throw InputError("need kappa > 0 and lambda >= 0");
  for (double p : priors_) log_priors_.push_back(std::log(p));

  precision_ = build_precision(lattice_, kappa_, lambda_);
  precision_factor_ = std::make_shared<SparseFactor>(precision_);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n_sites());
  e0[0] = 1.0;
  stationary_column_ = precision_factor_->solve(e0);
}

const Eigen::VectorXd& GaussianMixtureModel::mean(int y) const {
  check_class(y);
  return means_[y];
}

void GaussianMixtureModel::check_class(int y) const {
  if (y < 0 || y >= n_classes())
    throw InputError("class " + std::to_string(y) + " out of range [0, " +
                     std::to_string(n_classes()) + ")");
}

Eigen::MatrixXd GaussianMixtureModel::covariance_block(std::span<const int> sites) const {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) c(a, b) = covariance(sites[a], sites[b]);
  return c;
}

Eigen::MatrixXd GaussianMixtureModel::dense_covariance() const {
  std::vector<int> all(n_sites());
  std::iota(all.begin(), all.end(), 0);
  return covariance_block(all);
}

std::shared_ptr<const NoisedMixture> GaussianMixtureModel::at(Marginal mg) const {
  const std::uint64_t key = std::bit_cast<std::uint64_t>(mg.alpha_bar);
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second->marginal().sigma2 == mg.sigma2) return it->second;
  }
  auto slice = std::make_shared<const NoisedMixture>(*this, mg);
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() >= kMaxCachedSlices) cache_.clear();
  cache_[key] = slice;
  return slice;
}

NoisedMixture::NoisedMixture(const GaussianMixtureModel& model, Marginal mg)
    : model_(&model), mg_(mg) {
  if (!(mg.alpha_bar >= 0.0 && mg.sigma2 >= 0.0 && mg.alpha_bar + mg.sigma2 > 0.0))
    throw InputError("invalid marginal coefficients");
  const int n = model.n_sites();
  Eigen::SparseMatrix<double> m = mg.sigma2 * model.precision();
  Eigen::SparseMatrix<double> eye(n, n);
  eye.setIdentity();
  m += mg.alpha_bar * eye;
  factor_ = std::make_unique<SparseFactor>(m);
  // Sigma_t = Q^{-1} (ab I + s2 Q)
  log_det_cov_ = factor_->log_det() - model.precision_factor().log_det();
  const double scale = std::sqrt(mg.alpha_bar);
  for (int y = 0; y < model.n_classes(); ++y) scaled_means_.push_back(scale * model.mean(y));
}

Eigen::VectorXd NoisedMixture::apply_precision(const Eigen::VectorXd& v) const {
  return factor_->solve(model_->precision() * v);
}

Eigen::VectorXd NoisedMixture::class_log_joint(const Eigen::VectorXd& x) const {
  if (x.size() != model_->n_sites()) throw InputError("state length != n_sites");
  const int k = model_->n_classes();
  const double norm = -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det_cov_);
  Eigen::VectorXd out(k);
  for (int y = 0; y < k; ++y) {
    const Eigen::VectorXd d = x - scaled_means_[y];
    out[y] = model_->log_priors()[y] + norm - 0.5 * d.dot(apply_precision(d));
  }
  return out;
}

double NoisedMixture::log_density(const Eigen::VectorXd& x) const {
  return log_sum_exp(class_log_joint(x));
}

Eigen::VectorXd NoisedMixture::posterior(const Eigen::VectorXd& x) const {
  return softmax(class_log_joint(x));
}

Eigen::VectorXd NoisedMixture::score_conditional(const Eigen::VectorXd& x, int y) const {
  model_->check_class(y);
  if (x.size() != model_->n_sites()) throw InputError("state length != n_sites");
  return -apply_precision(x - scaled_means_[y]);
}

Eigen::VectorXd NoisedMixture::score_marginal(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd w = posterior(x);
  Eigen::VectorXd weighted_mean = Eigen::VectorXd::Zero(x.size());
  for (int y = 0; y < model_->n_classes(); ++y) weighted_mean += w[y] * scaled_means_[y];
  // sum_y w_y (-P (x - m_y)) = -P (x - sum_y w_y m_y)
  return -apply_precision(x - weighted_mean);
}

Eigen::VectorXd NoisedMixture::score_cfg(const Eigen::VectorXd& x, int y, double w) const {
  if (!(w >= 0.0)) throw InputError("guidance scale must be >= 0");
  const Eigen::VectorXd su = score_marginal(x);
  return su + w * (score_conditional(x, y) - su);
}

Eigen::VectorXd NoisedMixture::score(const Eigen::VectorXd& x, const ScoreMode& mode) const {
  switch (mode.kind) {
    case ScoreMode::Kind::Uncond:
      return score_marginal(x);
    case ScoreMode::Kind::Cond:
      return score_conditional(x, mode.y);
    case ScoreMode::Kind::Cfg:
      return score_cfg(x, mode.y, mode.w);
  }
  return {};
}

int NoisedMixture::classify(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd lj = class_log_joint(x);
  int best = 0;
  for (int y = 1; y < lj.size(); ++y)
    if (lj[y] > lj[best]) best = y;
  return best;
}

SubsetMixture::SubsetMixture(const GaussianMixtureModel& model, Marginal mg, SiteSet sites)
    : model_(&model), sites_(std::move(sites)) {
  const Eigen::Index n = size();
  if (n == 0) throw InputError("subset mixture over an empty site set");
  for (int s : sites_)
    if (!model.lattice().valid_site(s)) throw InputError("subset site out of range");
  Eigen::MatrixXd cov = mg.alpha_bar * model.covariance_block(sites_);
  cov.diagonal().array() += mg.sigma2;
  llt_.compute(cov);
  if (llt_.info() != Eigen::Success) throw NumericError("window covariance not SPD");
  precision_ = llt_.solve(Eigen::MatrixXd::Identity(n, n));
  precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(n) * kLog2Pi + log_det);
  const double scale = std::sqrt(mg.alpha_bar);
  for (int y = 0; y < model.n_classes(); ++y) scaled_means_.push_back(scale * gather(model.mean(y)));
}

Eigen::VectorXd SubsetMixture::gather(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(size());
  for (Eigen::Index a = 0; a < size(); ++a) out[a] = x[sites_[a]];
  return out;
}

Eigen::VectorXd SubsetMixture::class_log_joint(const Eigen::VectorXd& x_s) const {
  const int k = model_->n_classes();
  Eigen::VectorXd out(k);
  for (int y = 0; y < k; ++y) {
    const Eigen::VectorXd d = x_s - scaled_means_[y];
    out[y] = model_->log_priors()[y] + log_norm_ - 0.5 * d.dot(precision_ * d);
  }
  return out;
}

double SubsetMixture::log_density(const Eigen::VectorXd& x_s) const {
  return log_sum_exp(class_log_joint(x_s));
}

Eigen::VectorXd SubsetMixture::gradient(const Eigen::VectorXd& x_s, std::optional<int> cond) const {
  if (cond) {
    model_->check_class(*cond);
    return -(precision_ * (x_s - scaled_means_[*cond]));
  }
  const Eigen::VectorXd w = softmax(class_log_joint(x_s));
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(size());
  for (int y = 0; y < model_->n_classes(); ++y) centre += w[y] * scaled_means_[y];
  return -(precision_ * (x_s - centre));
}

double SubsetMixture::gradient_entry(const Eigen::VectorXd& x_s, Eigen::Index pos,
                                     std::optional<int> cond) const {
  Eigen::VectorXd centre;
  if (cond) {
    model_->check_class(*cond);
    centre = scaled_means_[*cond];
  } else {
    const Eigen::VectorXd w = softmax(class_log_joint(x_s));
    centre = Eigen::VectorXd::Zero(size());
    for (int y = 0; y < model_->n_classes(); ++y) centre += w[y] * scaled_means_[y];
  }
  return -precision_.row(pos).dot(x_s - centre);
}

CleanSample sample_clean(const GaussianMixtureModel& m, Stream& rng, std::optional<int> y) {
  int label;
  if (y) {
    m.check_class(*y);
    label = *y;
  } else {
    const double u = rng.uniform();
    double acc = 0.0;
    label = m.n_classes() - 1;
    for (int k = 0; k < m.n_classes(); ++k) {
      acc += m.priors()[k];
      if (u < acc) {
        label = k;
        break;
      }
    }
  }
  const Eigen::VectorXd z = rng.normal_vector(m.n_sites());
  return {m.mean(label) + m.precision_factor().inverse_sqrt_apply(z), label};
}

double log_density(const GaussianMixtureModel& m, const NoiseSchedule& s, const Eigen::VectorXd& x,
                   double t) {
  return m.at(s.marginal(t))->log_density(x);
}

ScoreEval score_conditional(const GaussianMixtureModel& m, const NoiseSchedule& s,
                            const Eigen::VectorXd& x, double t, int y) {
  return {m.at(s.marginal(t))->score_conditional(x, y), t, ScoreMode::cond(y), Scope::global()};
}

Eigen::VectorXd posterior(const GaussianMixtureModel& m, const NoiseSchedule& s,
                          const Eigen::VectorXd& x, double t) {
  return m.at(s.marginal(t))->posterior(x);
}

ScoreEval score_marginal(const GaussianMixtureModel& m, const NoiseSchedule& s,
                         const Eigen::VectorXd& x, double t) {
  return {m.at(s.marginal(t))->score_marginal(x), t, ScoreMode::uncond(), Scope::global()};
}

ScoreEval score_cfg(const GaussianMixtureModel& m, const NoiseSchedule& s, const Eigen::VectorXd& x,
                    double t, int y, double w) {
  return {m.at(s.marginal(t))->score_cfg(x, y, w), t, ScoreMode::cfg(y, w), Scope::global()};
}

int bayes_classify(const GaussianMixtureModel& m, const NoiseSchedule& s, const Eigen::VectorXd& x,
                   double t) {
  return m.at(s.marginal(t))->classify(x);
}

GaussianMixtureModel symmetric_ring_model(int n_sites, double m, double kappa, double lambda) {
  const LatticeSpec lattice = LatticeSpec::ring(n_sites);
  return GaussianMixtureModel(lattice, {0.5, 0.5},
                              {Eigen::VectorXd::Constant(n_sites, m),
                               Eigen::VectorXd::Constant(n_sites, -m)},
                              kappa, lambda);
}

double site_variance(const GaussianMixtureModel& model) { return model.covariance(0, 0); }

}  // namespace critwin
