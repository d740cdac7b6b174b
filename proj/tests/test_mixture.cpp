#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critwin/error.hpp"
#include "critwin/mixture.hpp"
#include "critwin/schedule.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace critwin;
using doctest::Approx;

namespace {

GaussianMixtureModel scalar_model(std::vector<double> means, double var) {
  std::vector<Eigen::VectorXd> mu;
  for (double m : means) mu.push_back(Eigen::VectorXd::Constant(1, m));
  std::vector<double> priors(means.size(), 1.0 / means.size());
  return GaussianMixtureModel(LatticeSpec::ring(1), priors, mu, 1.0 / var, 0.0);
}

const NoiseSchedule kCos = NoiseSchedule::cosine();

}  // namespace

TEST_CASE("standard normal log density at the origin") {
  const auto m = scalar_model({0.0}, 1.0);
  CHECK(log_density(m, kCos, Eigen::VectorXd::Zero(1), 0.5) ==
        Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("noisy endpoint density ignores the class means") {
  Stream rng(11);
  auto inst = fixture::random_instance(rng, 1, 6, 3, 5.0);
  const Eigen::VectorXd x = rng.normal_vector(6);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  const double expected = oracle::gaussian_log_pdf(x, zero, Eigen::MatrixXd::Identity(6, 6));
  CHECK(log_density(inst.model, kCos, x, 1.0) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("log density matches the dense oracle") {
  Stream rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = fixture::random_instance(rng, 1, 8, 2);
    const double t = 0.05 + 0.9 * rng.uniform();
    const Eigen::VectorXd x = rng.normal_vector(8);
    const double ab = oracle::cosine_alpha_bar(t);
    CHECK(std::abs(log_density(inst.model, kCos, x, t) - inst.dense.log_density(x, ab)) < 1e-8);
  }
  auto inst = fixture::random_instance(rng, 3, 4, 3);
  const Eigen::VectorXd x = rng.normal_vector(12);
  CHECK(std::abs(log_density(inst.model, kCos, x, 0.3) -
                 inst.dense.log_density(x, oracle::cosine_alpha_bar(0.3))) < 1e-8);
}

TEST_CASE("stationary covariance equals the dense inverse precision") {
  Stream rng(13);
  for (auto [h, w] : {std::pair{1, 7}, std::pair{3, 5}, std::pair{2, 2}, std::pair{1, 2}}) {
    auto inst = fixture::random_instance(rng, h, w, 1);
    CHECK((inst.model.dense_covariance() - inst.dense.sigma).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("conditional score of a unit Gaussian") {
  const auto m = scalar_model({0.0}, 1.0);
  const auto s = score_conditional(m, kCos, Eigen::VectorXd::Constant(1, 2.0), 0.5, 0);
  CHECK(s.vector[0] == Approx(-2.0).epsilon(1e-12));
  CHECK(s.mode == ScoreMode::cond(0));
  CHECK(s.scope.is_global());
}

TEST_CASE("conditional score vanishes at the scaled class mean") {
  Stream rng(14);
  auto inst = fixture::random_instance(rng, 1, 8, 3);
  for (double t : {0.1, 0.5, 0.9}) {
    const double ab = oracle::cosine_alpha_bar(t);
    for (int y = 0; y < 3; ++y) {
      const Eigen::VectorXd x = std::sqrt(ab) * inst.model.mean(y);
      CHECK(score_conditional(inst.model, kCos, x, t, y).vector.norm() < 1e-10);
    }
  }
}

TEST_CASE("scores match finite differences of the dense log densities") {
  Stream rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = fixture::random_instance(rng, 1, 8, 3);
    const double t = 0.05 + 0.9 * rng.uniform();
    const double ab = oracle::cosine_alpha_bar(t);
    const Eigen::VectorXd x = rng.normal_vector(8);
    const auto fd_marg =
        oracle::central_difference([&](const Eigen::VectorXd& v) { return inst.dense.log_density(v, ab); }, x);
    CHECK(oracle::relative_error(score_marginal(inst.model, kCos, x, t).vector, fd_marg) < 1e-6);
    const int y = static_cast<int>(rng.below(3));
    const auto fd_cond = oracle::central_difference(
        [&](const Eigen::VectorXd& v) { return inst.dense.log_conditional(v, ab, y); }, x);
    CHECK(oracle::relative_error(score_conditional(inst.model, kCos, x, t, y).vector, fd_cond) < 1e-6);
  }
}

TEST_CASE("posterior examples and oracle") {
  const auto sym = symmetric_ring_model(6, 0.7, 1.0, 1.0);
  const auto p0 = posterior(sym, kCos, Eigen::VectorXd::Zero(6), 0.3);
  CHECK(p0[0] == Approx(0.5).epsilon(1e-14));
  CHECK(p0[1] == Approx(0.5).epsilon(1e-14));

  Stream rng(16);
  auto inst = fixture::random_instance(rng, 1, 4, 3, 2.0);
  const Eigen::VectorXd x = rng.normal_vector(4);
  const auto at_one = posterior(inst.model, kCos, x, 1.0);
  for (int y = 0; y < 3; ++y) CHECK(at_one[y] == Approx(inst.model.priors()[y]).epsilon(1e-12));

  for (int trial = 0; trial < 10; ++trial) {
    const double t = 0.05 + 0.9 * rng.uniform();
    const Eigen::VectorXd v = rng.normal_vector(4);
    const auto got = posterior(inst.model, kCos, v, t);
    const auto want = inst.dense.posterior(v, oracle::cosine_alpha_bar(t));
    CHECK(std::abs(got.sum() - 1.0) < 1e-14);
    for (int y = 0; y < 3; ++y) CHECK(std::abs(got[y] - want[y]) < 1e-10);
  }
}

TEST_CASE("marginal score examples") {
  const auto sym = symmetric_ring_model(8, 0.5, 1.0, 2.0);
  CHECK(score_marginal(sym, kCos, Eigen::VectorXd::Zero(8), 0.4).vector.norm() < 1e-14);

  Stream rng(17);
  auto one = fixture::random_instance(rng, 1, 6, 1);
  const Eigen::VectorXd x = rng.normal_vector(6);
  CHECK((score_marginal(one.model, kCos, x, 0.3).vector -
         score_conditional(one.model, kCos, x, 0.3, 0).vector).norm() < 1e-13);
}

TEST_CASE("marginal score is the posterior-weighted conditional score") {
  Stream rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = fixture::random_instance(rng, 2, 3, 3);
    const double t = 0.05 + 0.9 * rng.uniform();
    const Eigen::VectorXd x = rng.normal_vector(6);
    const auto post = posterior(inst.model, kCos, x, t);
    Eigen::VectorXd mix = Eigen::VectorXd::Zero(6);
    for (int y = 0; y < 3; ++y) mix += post[y] * score_conditional(inst.model, kCos, x, t, y).vector;
    CHECK((score_marginal(inst.model, kCos, x, t).vector - mix).norm() < 1e-12);
  }
}

TEST_CASE("noisy endpoint posterior is the prior and the score is -x") {
  Stream rng(19);
  auto inst = fixture::random_instance(rng, 1, 5, 2, 3.0);
  const Eigen::VectorXd x = rng.normal_vector(5);
  CHECK((score_marginal(inst.model, kCos, x, 1.0).vector + x).norm() < 1e-12);
}

TEST_CASE("guidance identities") {
  Stream rng(20);
  auto inst = fixture::random_instance(rng, 1, 6, 3);
  const Eigen::VectorXd x = rng.normal_vector(6);
  const double t = 0.4;
  const auto u = score_marginal(inst.model, kCos, x, t).vector;
  const auto c = score_conditional(inst.model, kCos, x, t, 2).vector;
  CHECK((score_cfg(inst.model, kCos, x, t, 2, 0.0).vector - u).norm() < 1e-12);
  CHECK((score_cfg(inst.model, kCos, x, t, 2, 1.0).vector - c).norm() < 1e-12);
  const auto a = score_cfg(inst.model, kCos, x, t, 2, 0.5).vector;
  const auto b = score_cfg(inst.model, kCos, x, t, 2, 1.5).vector;
  const auto d = score_cfg(inst.model, kCos, x, t, 2, 3.0).vector;
  // Affine in w: equal spacing in w gives equal spacing in the output.
  CHECK(((b - a) / 1.0 - (d - b) / 1.5).norm() < 1e-12);
  CHECK_THROWS_AS(score_cfg(inst.model, kCos, x, t, 2, -1.0), InputError);
}

TEST_CASE("guidance extrapolation on a scalar two-class model") {
  // mu = +/-1, unit variance, alpha_bar = 1/2 so the noised variance is 1.
  const auto m = scalar_model({1.0, -1.0}, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  const double cond = std::sqrt(0.5);  // -(0 - sqrt(1/2) * 1)
  CHECK(score_conditional(m, kCos, x, 0.5, 0).vector[0] == Approx(cond).epsilon(1e-12));
  CHECK(std::abs(score_marginal(m, kCos, x, 0.5).vector[0]) < 1e-15);
  CHECK(score_cfg(m, kCos, x, 0.5, 0, 2.0).vector[0] == Approx(2.0 * cond).epsilon(1e-12));
}

TEST_CASE("bayes classification") {
  const double amp = 0.8;
  const auto sym = symmetric_ring_model(8, amp, 1.0, 1.0);
  CHECK(bayes_classify(sym, kCos, Eigen::VectorXd::Constant(8, amp), 0.01) == 0);
  CHECK(bayes_classify(sym, kCos, Eigen::VectorXd::Constant(8, -amp), 0.01) == 1);
  CHECK(bayes_classify(sym, kCos, Eigen::VectorXd::Zero(8), 0.01) == 0);

  Stream rng(21);
  auto inst = fixture::random_instance(rng, 1, 5, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = 0.05 + 0.9 * rng.uniform();
    const Eigen::VectorXd x = rng.normal_vector(5);
    const auto terms = inst.dense.class_terms(x, oracle::cosine_alpha_bar(t));
    int best = 0;
    for (int y = 1; y < 3; ++y)
      if (terms[y] > terms[best]) best = y;
    CHECK(bayes_classify(inst.model, kCos, x, t) == best);
  }
}

TEST_CASE("clean sampling moments, labels and determinism") {
  const auto iid = GaussianMixtureModel(LatticeSpec::ring(4), {1.0}, {Eigen::VectorXd::Zero(4)}, 1.0, 0.0);
  Stream rng(22);
  const int n = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sum2 = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i) {
    const auto cs = sample_clean(iid, rng);
    sum += cs.x0;
    sum2 += cs.x0.cwiseAbs2();
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = sum[i] / n;
    const double var = sum2[i] / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
  }

  auto inst = fixture::random_instance(rng, 1, 6, 3);
  Stream a(5), b(5);
  const auto sa = sample_clean(inst.model, a, 1);
  const auto sb = sample_clean(inst.model, b, 1);
  CHECK(sa.y == 1);
  CHECK(sa.x0 == sb.x0);
  CHECK_THROWS_AS(sample_clean(inst.model, a, 3), InputError);
}

TEST_CASE("clean samples have the GMRF covariance") {
  Stream rng(23);
  const auto m = GaussianMixtureModel(LatticeSpec::ring(6), {1.0}, {Eigen::VectorXd::Zero(6)}, 0.5, 1.0);
  const Eigen::MatrixXd sigma = oracle::precision(1, 6, 0.5, 1.0).inverse();
  const int n = 100000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const auto x = sample_clean(m, rng).x0;
    acc += x * x.transpose();
  }
  acc /= n;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
      CHECK(std::abs(acc(i, j) - sigma(i, j)) < 4.0 * se);
    }
}

TEST_CASE("class draws follow the priors") {
  const auto m = GaussianMixtureModel(LatticeSpec::ring(2), {0.2, 0.8},
                                      {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)}, 1.0, 0.0);
  Stream rng(24);
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ones += sample_clean(m, rng).y;
  CHECK(std::abs(ones / double(n) - 0.8) < 4.0 * std::sqrt(0.16 / n));
}

TEST_CASE("invalid model construction") {
  const auto lat = LatticeSpec::ring(3);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(GaussianMixtureModel(lat, {}, {}, 1.0, 1.0), InputError);
  CHECK_THROWS_AS(GaussianMixtureModel(lat, {0.5, 0.4}, {z, z}, 1.0, 1.0), InputError);
  CHECK_THROWS_AS(GaussianMixtureModel(lat, {1.0}, {Eigen::VectorXd::Zero(2)}, 1.0, 1.0), InputError);
  CHECK_THROWS_AS(GaussianMixtureModel(lat, {1.0}, {z}, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(GaussianMixtureModel(lat, {1.0}, {z}, 1.0, -1.0), InputError);
  const auto m = GaussianMixtureModel(lat, {1.0}, {z}, 1.0, 1.0);
  CHECK_THROWS_AS(score_conditional(m, kCos, z, 0.5, 1), InputError);
}

TEST_CASE("noise-level slices are cached") {
  const auto m = symmetric_ring_model(8, 0.3, 1.0, 4.0);
  const auto a = m.at(kCos.marginal(0.3));
  const auto b = m.at(kCos.marginal(0.3));
  CHECK(a.get() == b.get());
  CHECK(a.get() != m.at(kCos.marginal(0.4)).get());
}
