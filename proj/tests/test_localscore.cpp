#include <doctest.h>

#include <cmath>

#include "critwin/error.hpp"
#include "critwin/localscore.hpp"
#include "critwin/sampler.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace critwin;

namespace {

const NoiseSchedule kCos = NoiseSchedule::cosine();

Eigen::VectorXd take(const Eigen::VectorXd& v, const SiteSet& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

// Window marginal built from the precision via a Schur complement:
// Sigma_WW = (Q_WW - Q_WC Q_CC^{-1} Q_CW)^{-1}.
oracle::DenseMixture schur_window(const oracle::DenseMixture& full, const Eigen::MatrixXd& q,
                                  const SiteSet& w, const SiteSet& c) {
  auto block = [&](const SiteSet& r, const SiteSet& k) {
    Eigen::MatrixXd m(r.size(), k.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < k.size(); ++j) m(i, j) = q(r[i], k[j]);
    return m;
  };
  Eigen::MatrixXd prec_w = block(w, w);
  if (!c.empty()) prec_w -= block(w, c) * block(c, c).inverse() * block(c, w);
  oracle::DenseMixture out = full.restrict_to(w);
  out.sigma = prec_w.inverse();
  return out;
}

}  // namespace

TEST_CASE("full-coverage window reproduces the global score") {
  Stream rng(31);
  auto inst = fixture::random_instance(rng, 1, 8, 2);
  const Eigen::VectorXd x = rng.normal_vector(8);
  const int a[] = {3};
  const auto part = tripartition(inst.model.lattice(), a, 4);
  REQUIRE(part.c_sites.empty());
  const Eigen::VectorXd g = score_marginal(inst.model, kCos, x, 0.4).vector;
  const Eigen::VectorXd l = local_score_patch(inst.model, kCos, x, 0.4, part);
  CHECK(std::abs(l[0] - g[3]) < 1e-10);
  const Eigen::VectorXd gc = score_conditional(inst.model, kCos, x, 0.4, 1).vector;
  CHECK(std::abs(local_score_patch(inst.model, kCos, x, 0.4, part, 1)[0] - gc[3]) < 1e-10);
}

TEST_CASE("independent sites make every radius exact") {
  Stream rng(32);
  const auto m = GaussianMixtureModel(LatticeSpec::ring(7), {1.0}, {rng.normal_vector(7)}, 0.7, 0.0);
  const Eigen::VectorXd x = rng.normal_vector(7);
  const Eigen::VectorXd g = score_marginal(m, kCos, x, 0.6).vector;
  for (int r = 0; r <= 3; ++r) {
    CHECK((local_score_full(m, kCos, x, 0.6, r).vector - g).norm() < 1e-12);
    const int a[] = {2};
    CHECK(std::abs(local_score_patch(m, kCos, x, 0.6, tripartition(m.lattice(), a, r))[0] - g[2]) < 1e-12);
  }
}

TEST_CASE("patch score matches the Schur-complement window oracle") {
  Stream rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    auto inst = fixture::random_instance(rng, 1, 12, 2);
    const Eigen::MatrixXd q =
        oracle::precision(1, 12, inst.model.kappa(), inst.model.lambda());
    const double t = 0.1 + 0.8 * rng.uniform();
    const double ab = oracle::cosine_alpha_bar(t);
    const Eigen::VectorXd x = rng.normal_vector(12);
    std::vector<int> a = {static_cast<int>(rng.below(12))};
    if (trial % 2 == 1) a.push_back((a[0] + 1) % 12);
    const auto part = tripartition(inst.model.lattice(), a, 2);
    SiteSet w = part.a_sites;
    w.insert(w.end(), part.b_sites.begin(), part.b_sites.end());
    std::sort(w.begin(), w.end());
    const auto win = schur_window(inst.dense, q, w, part.c_sites);
    const Eigen::VectorXd xw = take(x, w);

    for (std::optional<int> cond : {std::optional<int>{}, std::optional<int>{1}}) {
      const auto fd = oracle::central_difference(
          [&](const Eigen::VectorXd& v) {
            return cond ? win.log_conditional(v, ab, *cond) : win.log_density(v, ab);
          },
          xw);
      Eigen::VectorXd want(part.a_sites.size());
      for (std::size_t k = 0; k < part.a_sites.size(); ++k)
        want[k] = fd[std::find(w.begin(), w.end(), part.a_sites[k]) - w.begin()];
      const Eigen::VectorXd got = local_score_patch(inst.model, kCos, x, t, part, cond);
      CHECK(oracle::relative_error(got, want) < 1e-5);
    }
  }
}

TEST_CASE("per-site local score agrees with patch calls") {
  Stream rng(34);
  auto inst = fixture::random_instance(rng, 1, 12, 3);
  const Eigen::VectorXd x = rng.normal_vector(12);
  for (std::optional<int> cond : {std::optional<int>{}, std::optional<int>{2}}) {
    const auto full = local_score_full(inst.model, kCos, x, 0.35, 1, cond);
    CHECK(full.scope == Scope::local(1));
    for (int i = 0; i < 12; ++i) {
      const int a[] = {i};
      const auto p = local_score_patch(inst.model, kCos, x, 0.35,
                                       tripartition(inst.model.lattice(), a, 1), cond);
      CHECK(std::abs(full.vector[i] - p[0]) < 1e-12);
    }
  }
}

TEST_CASE("radius at the diameter and a single site are global") {
  Stream rng(35);
  auto inst = fixture::random_instance(rng, 3, 4, 2);
  const Eigen::VectorXd x = rng.normal_vector(12);
  const int d = inst.model.lattice().diameter();
  CHECK((local_score_full(inst.model, kCos, x, 0.5, d).vector -
         score_marginal(inst.model, kCos, x, 0.5).vector).norm() < 1e-12);
  CHECK((local_score_full(inst.model, kCos, x, 0.5, d, 0).vector -
         score_conditional(inst.model, kCos, x, 0.5, 0).vector).norm() < 1e-12);

  const auto one = GaussianMixtureModel(LatticeSpec::ring(1), {0.5, 0.5},
                                        {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)},
                                        2.0, 0.0);
  const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(1, 0.3);
  for (int r : {0, 1, 5})
    CHECK(std::abs(local_score_full(one, kCos, x1, 0.5, r).vector[0] -
                   score_marginal(one, kCos, x1, 0.5).vector[0]) < 1e-12);
}

TEST_CASE("dense patch route agrees with the global score when C is empty") {
  // local_score_patch never takes the global shortcut, so this compares two
  // independent code paths.
  Stream rng(36);
  auto inst = fixture::random_instance(rng, 4, 4, 3);
  const Eigen::VectorXd x = rng.normal_vector(16);
  const Eigen::VectorXd g = score_marginal(inst.model, kCos, x, 0.25).vector;
  for (int i = 0; i < 16; ++i) {
    const int a[] = {i};
    const auto part = tripartition(inst.model.lattice(), a, inst.model.lattice().diameter());
    CHECK(std::abs(local_score_patch(inst.model, kCos, x, 0.25, part)[0] - g[i]) < 1e-10);
  }
}

TEST_CASE("local residual is orthogonal to the local score") {
  Stream rng(37);
  const auto m = symmetric_ring_model(8, 0.6, 1.0, 2.0);
  const double t = 0.3;
  const Marginal mg = kCos.marginal(t);
  const LocalScorer scorer(m, mg, 1);
  const auto slice = m.at(mg);
  const int n = 20000;
  std::vector<double> prods(n);
  for (int i = 0; i < n; ++i) {
    const auto cs = sample_clean(m, rng);
    const Eigen::VectorXd x = forward_noise(kCos, cs.x0, t, rng);
    const Eigen::VectorXd g = slice->score_marginal(x);
    const Eigen::VectorXd l = scorer.score(x, std::nullopt);
    prods[i] = (g[0] - l[0]) * l[0];
  }
  double mean = 0.0;
  for (double v : prods) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : prods) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("local score inputs are validated") {
  const auto m = symmetric_ring_model(8, 0.5, 1.0, 1.0);
  const auto other = LatticeSpec::ring(10);
  const int a[] = {9};
  CHECK_THROWS_AS(local_score_patch(m, kCos, Eigen::VectorXd::Zero(8), 0.5, tripartition(other, a, 1)),
                  InputError);
  CHECK_THROWS_AS(local_score_full(m, kCos, Eigen::VectorXd::Zero(8), 0.5, -1), InputError);
}
