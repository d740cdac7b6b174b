#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "critwin/lattice.hpp"
#include "critwin/mixture.hpp"
#include "critwin/schedule.hpp"
#include "critwin/score_types.hpp"

namespace critwin {

// grad_{x_A} log p_t(x_A | x_B) using the exact marginal of q_t on W = A u B.
// Dense window algebra; no shortcut when C is empty.
Eigen::VectorXd local_score_patch(const GaussianMixtureModel& m, Marginal mg,
                                  const Eigen::VectorXd& x, const Tripartition& part,
                                  std::optional<int> cond = {});
Eigen::VectorXd local_score_patch(const GaussianMixtureModel& m, const NoiseSchedule& s,
                                  const Eigen::VectorXd& x, double t, const Tripartition& part,
                                  std::optional<int> cond = {});

// Per-site radius-r local score at one noise level. Window factorizations are
// built once; score() is then const and thread-safe.
class LocalScorer {
 public:
  LocalScorer(const GaussianMixtureModel& m, Marginal mg, int radius);

  int radius() const { return radius_; }
  // True when every window is the whole lattice; score() then delegates to the
  // global score.
  bool covers_all() const { return covers_all_; }
  Eigen::VectorXd score(const Eigen::VectorXd& x, std::optional<int> cond) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x, const ScoreMode& mode) const;

 private:
  const GaussianMixtureModel* model_;
  Marginal mg_;
  int radius_;
  bool covers_all_ = false;
  std::shared_ptr<const NoisedMixture> global_;
  std::vector<SubsetMixture> windows_;
  std::vector<Eigen::Index> centre_pos_;
};

ScoreEval local_score_full(const GaussianMixtureModel& m, const NoiseSchedule& s,
                           const Eigen::VectorXd& x, double t, int r, std::optional<int> cond = {});

}  // namespace critwin
