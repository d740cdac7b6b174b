#include "critwin/localscore.hpp"

#include <algorithm>

#include "critwin/error.hpp"

namespace critwin {

Eigen::VectorXd local_score_patch(const GaussianMixtureModel& m, Marginal mg,
                                  const Eigen::VectorXd& x, const Tripartition& part,
                                  std::optional<int> cond) {
  if (!is_partition_of(part, m.lattice()))
    throw InputError("tripartition does not partition the model lattice");
  if (x.size() != m.n_sites()) throw InputError("state length != n_sites");
  SiteSet window = part.a_sites;
  window.insert(window.end(), part.b_sites.begin(), part.b_sites.end());
  std::sort(window.begin(), window.end());
  const SubsetMixture marginal(m, mg, window);
  const Eigen::VectorXd grad = marginal.gradient(marginal.gather(x), cond);
  Eigen::VectorXd out(static_cast<Eigen::Index>(part.a_sites.size()));
  for (std::size_t k = 0; k < part.a_sites.size(); ++k) {
    const auto pos = std::lower_bound(window.begin(), window.end(), part.a_sites[k]) - window.begin();
    out[static_cast<Eigen::Index>(k)] = grad[pos];
  }
  return out;
}

Eigen::VectorXd local_score_patch(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                  const Eigen::VectorXd& x, double t, const Tripartition& part,
                                  std::optional<int> cond) {
  return local_score_patch(m, s.marginal(t), x, part, cond);
}

LocalScorer::LocalScorer(const GaussianMixtureModel& m, Marginal mg, int radius)
    : model_(&m), mg_(mg), radius_(radius) {
  if (radius < 0) throw InputError("local radius must be >= 0");
  const LatticeSpec& lat = m.lattice();
  covers_all_ = radius >= lat.diameter();
  if (covers_all_) {
    global_ = m.at(mg);
    return;
  }
  windows_.reserve(lat.n_sites());
  for (int i = 0; i < lat.n_sites(); ++i) {
    const int centre[1] = {i};
    SiteSet w = neighborhood(lat, centre, radius);
    centre_pos_.push_back(std::lower_bound(w.begin(), w.end(), i) - w.begin());
    windows_.emplace_back(m, mg, std::move(w));
  }
}

Eigen::VectorXd LocalScorer::score(const Eigen::VectorXd& x, std::optional<int> cond) const {
  if (covers_all_) return cond ? global_->score_conditional(x, *cond) : global_->score_marginal(x);
  if (x.size() != model_->n_sites()) throw InputError("state length != n_sites");
  Eigen::VectorXd out(x.size());
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    const SubsetMixture& w = windows_[i];
    out[static_cast<Eigen::Index>(i)] = w.gradient_entry(w.gather(x), centre_pos_[i], cond);
  }
  return out;
}

Eigen::VectorXd LocalScorer::score(const Eigen::VectorXd& x, const ScoreMode& mode) const {
  switch (mode.kind) {
    case ScoreMode::Kind::Uncond:
      return score(x, std::nullopt);
    case ScoreMode::Kind::Cond:
      return score(x, mode.y);
    case ScoreMode::Kind::Cfg: {
      if (!(mode.w >= 0.0)) throw InputError("guidance scale must be >= 0");
      const Eigen::VectorXd su = score(x, std::nullopt);
      return su + mode.w * (score(x, mode.y) - su);
    }
  }
  return {};
}

ScoreEval local_score_full(const GaussianMixtureModel& m, const NoiseSchedule& s,
                           const Eigen::VectorXd& x, double t, int r, std::optional<int> cond) {
  const LocalScorer scorer(m, s.marginal(t), r);
  return {scorer.score(x, cond), t, cond ? ScoreMode::cond(*cond) : ScoreMode::uncond(),
          Scope::local(r)};
}

}  // namespace critwin
