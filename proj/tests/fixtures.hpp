#pragma once

#include <vector>

#include <Eigen/Dense>

#include "critwin/mixture.hpp"
#include "critwin/rng.hpp"
#include "oracles.hpp"

namespace fixture {

struct RandomInstance {
  critwin::GaussianMixtureModel model;
  oracle::DenseMixture dense;
};

inline std::vector<double> random_priors(critwin::Stream& rng, int k) {
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += (v = 0.2 + rng.uniform());
  for (auto& v : p) v /= total;
  return p;
}

// Random mixture on a ring (or torus when h > 1); the dense twin is built from
// an explicitly assembled precision matrix.
inline RandomInstance random_instance(critwin::Stream& rng, int h, int w, int k,
                                      double mean_scale = 1.0) {
  const auto lat = h > 1 ? critwin::LatticeSpec::torus(h, w) : critwin::LatticeSpec::ring(w);
  const int n = h * w;
  const double kappa = 0.3 + rng.uniform();
  const double lambda = 1.5 * rng.uniform();
  const auto priors = random_priors(rng, k);
  std::vector<Eigen::VectorXd> means;
  for (int y = 0; y < k; ++y) means.push_back(mean_scale * rng.normal_vector(n));
  oracle::DenseMixture dense{priors, means, oracle::precision(h, w, kappa, lambda).inverse()};
  return {critwin::GaussianMixtureModel(lat, priors, means, kappa, lambda), std::move(dense)};
}

inline oracle::DenseMixture dense_twin(const critwin::GaussianMixtureModel& m) {
  const auto& lat = m.lattice();
  oracle::DenseMixture d;
  d.priors = m.priors();
  for (int y = 0; y < m.n_classes(); ++y) d.means.push_back(m.mean(y));
  d.sigma = oracle::precision(lat.height(), lat.width(), m.kappa(), m.lambda()).inverse();
  return d;
}

}  // namespace fixture
