#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "critwin/localscore.hpp"
#include "critwin/mixture.hpp"
#include "critwin/score_types.hpp"

namespace critwin {

// Time-windowed choice of (mode, scope). A window owns the half-open interval
// (t_lo, t_hi]; times outside every window use the default.
class DenoiserPolicy {
 public:
  struct Window {
    double t_lo;
    double t_hi;
    ScoreMode mode;
    Scope scope;
  };

  DenoiserPolicy() = default;
  DenoiserPolicy(std::vector<Window> windows, ScoreMode default_mode, Scope default_scope);

  static DenoiserPolicy constant(ScoreMode mode, Scope scope = Scope::global());
  // `inside` on [lo, hi] clipped to (0, 1], `outside` elsewhere.
  static DenoiserPolicy windowed(double lo, double hi, ScoreMode inside_mode, Scope inside_scope,
                                 ScoreMode outside_mode, Scope outside_scope);

  // Throws ConfigError naming the offending windows.
  void validate(int n_classes = -1) const;

  struct Resolved {
    ScoreMode mode;
    Scope scope;
  };
  Resolved resolve(double t) const;

  const std::vector<Window>& windows() const { return windows_; }
  ScoreMode default_mode() const { return default_mode_; }
  Scope default_scope() const { return default_scope_; }
  std::string id() const;

 private:
  std::vector<Window> windows_;
  ScoreMode default_mode_;
  Scope default_scope_;
};

// A (mode, scope) bound to one noise level, with its factorizations built.
// score() is const and safe to call concurrently.
class PolicyStep {
 public:
  PolicyStep(const GaussianMixtureModel& m, Marginal mg, ScoreMode mode, Scope scope);

  Eigen::VectorXd score(const Eigen::VectorXd& x) const;
  const ScoreMode& mode() const { return mode_; }
  const Scope& scope() const { return scope_; }

 private:
  ScoreMode mode_;
  Scope scope_;
  std::shared_ptr<const NoisedMixture> global_;
  std::unique_ptr<LocalScorer> local_;
};

ScoreEval policy_score(const GaussianMixtureModel& m, const NoiseSchedule& s,
                       const DenoiserPolicy& policy, const Eigen::VectorXd& x, double t);

}  // namespace critwin
