#include "critwin/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>

#include "critwin/error.hpp"
#include "critwin/metrics.hpp"
#include "critwin/rng.hpp"
#include "critwin/sampler.hpp"

namespace critwin {

namespace {

Eigen::MatrixXd sub(const Eigen::MatrixXd& m, const SiteSet& rows, const SiteSet& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  return out;
}

SiteSet merge(const SiteSet& a, const SiteSet& b) {
  SiteSet out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

double conditional_log_det(const Eigen::MatrixXd& cov, const SiteSet& a, const SiteSet& b) {
  Eigen::MatrixXd s_aa = sub(cov, a, a);
  if (!b.empty()) {
    const Eigen::MatrixXd s_bb = sub(cov, b, b);
    Eigen::LLT<Eigen::MatrixXd> llt_b(s_bb);
    if (llt_b.info() != Eigen::Success) throw NumericError("gaussian_cmi: covariance not SPD");
    const Eigen::MatrixXd s_ba = sub(cov, b, a);
    s_aa -= s_ba.transpose() * llt_b.solve(s_ba);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s_aa);
  if (llt.info() != Eigen::Success) throw NumericError("gaussian_cmi: covariance not SPD");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double gaussian_cmi(const Eigen::MatrixXd& cov, const Tripartition& part) {
  if (cov.rows() != cov.cols()) throw InputError("gaussian_cmi: covariance must be square");
  const Eigen::Index n = cov.rows();
  for (const SiteSet* set : {&part.a_sites, &part.b_sites, &part.c_sites})
    for (int i : *set)
      if (i < 0 || i >= n) throw InputError("gaussian_cmi: site outside covariance");
  if (static_cast<Eigen::Index>(part.a_sites.size() + part.b_sites.size() + part.c_sites.size()) != n)
    throw InputError("gaussian_cmi: tripartition does not cover the covariance");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw NumericError("gaussian_cmi: covariance not symmetric");
  Eigen::LLT<Eigen::MatrixXd> full(cov);
  if (full.info() != Eigen::Success) throw NumericError("gaussian_cmi: covariance not SPD");
  if (part.c_sites.empty()) return 0.0;
  const double ld_ab = conditional_log_det(cov, part.a_sites, part.b_sites);
  const double ld_abc = conditional_log_det(cov, part.a_sites, merge(part.b_sites, part.c_sites));
  double cmi = 0.5 * (ld_ab - ld_abc);
  if (cmi < 0.0 && cmi > -1e-10) cmi = 0.0;
  return cmi;
}

CmiEstimate mixture_cmi_mc(const GaussianMixtureModel& m, const NoiseSchedule& s, double t,
                           const Tripartition& part, int n, std::uint64_t seed, int workers) {
  if (n < 100) throw InputError("mixture_cmi_mc needs n >= 100");
  if (!is_partition_of(part, m.lattice())) throw InputError("tripartition does not match lattice");
  const Marginal mg = s.marginal(t);
  const SiteSet ab = merge(part.a_sites, part.b_sites);
  const SiteSet bc = merge(part.b_sites, part.c_sites);
  // log p(x_A|x_B,x_C) - log p(x_A|x_B) = log p(x) - log p(x_BC) - log p(x_AB) + log p(x_B)
  const auto full = m.at(mg);
  std::optional<SubsetMixture> p_bc, p_ab, p_b;
  if (!part.c_sites.empty()) {
    p_bc.emplace(m, mg, bc);
    p_ab.emplace(m, mg, ab);
    if (!part.b_sites.empty()) p_b.emplace(m, mg, part.b_sites);
  }
  std::vector<double> terms(static_cast<std::size_t>(n), 0.0);
  if (!part.c_sites.empty()) {
#pragma omp parallel for schedule(static) num_threads(workers > 0 ? workers : 1)
    for (int i = 0; i < n; ++i) {
      Stream rng(derive_seed(seed, "cmi", 0, static_cast<std::uint64_t>(i)));
      const CleanSample clean = sample_clean(m, rng);
      const Eigen::VectorXd x = forward_noise(s, clean.x0, t, rng);
      double v = full->log_density(x) - p_bc->log_density(p_bc->gather(x)) -
                 p_ab->log_density(p_ab->gather(x));
      if (p_b) v += p_b->log_density(p_b->gather(x));
      terms[static_cast<std::size_t>(i)] = v;
    }
  }
  const MeanEstimate est = mean_stderr(terms);
  return {est.mean, est.std_error};
}

MarkovFit markov_length_fit(std::span<const CmiPoint> points) {
  std::vector<CmiPoint> used;
  for (const auto& p : points)
    if (p.cmi > kCmiFloor && std::isfinite(p.cmi)) used.push_back(p);
  if (used.size() < 2) throw FitError("markov_length_fit needs >= 2 points above the CMI floor");
  const double n = static_cast<double>(used.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : used) {
    mx += p.r;
    my += std::log(p.cmi);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : used) {
    const double dx = p.r - mx;
    const double dy = std::log(p.cmi) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw FitError("markov_length_fit needs at least two distinct radii");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (const auto& p : used) {
    const double e = std::log(p.cmi) - (intercept + slope * p.r);
    ss_res += e * e;
  }
  // A flat series is fitted exactly by a zero slope.
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  const double xi = slope < 0.0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  return {xi, std::exp(intercept), r2, static_cast<int>(used.size())};
}

}  // namespace critwin
