#include "critwin/policy.hpp"

#include <algorithm>
#include <cstdio>

#include "critwin/error.hpp"

namespace critwin {

namespace {

std::string fmt_interval(const DenoiserPolicy::Window& w) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.9g, %.9g]", w.t_lo, w.t_hi);
  return buf;
}

void check_mode(const ScoreMode& mode, int n_classes, const std::string& where) {
  if (mode.kind != ScoreMode::Kind::Uncond && n_classes > 0 && (mode.y < 0 || mode.y >= n_classes))
    throw ConfigError(where + ": class " + std::to_string(mode.y) + " out of range");
  if (mode.kind == ScoreMode::Kind::Cfg && !(mode.w >= 0.0))
    throw ConfigError(where + ": guidance scale must be >= 0");
}

}  // namespace

DenoiserPolicy::DenoiserPolicy(std::vector<Window> windows, ScoreMode default_mode,
                               Scope default_scope)
    : windows_(std::move(windows)), default_mode_(default_mode), default_scope_(default_scope) {
  std::stable_sort(windows_.begin(), windows_.end(),
                   [](const Window& a, const Window& b) { return a.t_lo < b.t_lo; });
  validate();
}

DenoiserPolicy DenoiserPolicy::constant(ScoreMode mode, Scope scope) {
  return DenoiserPolicy({}, mode, scope);
}

DenoiserPolicy DenoiserPolicy::windowed(double lo, double hi, ScoreMode inside_mode,
                                        Scope inside_scope, ScoreMode outside_mode,
                                        Scope outside_scope) {
  // The lower edge is widened to 0 when it reaches the clean endpoint so that
  // (0, hi] is fully covered.
  const double clo = std::max(lo, 0.0);
  const double chi = std::min(hi, 1.0);
  if (!(chi > clo)) return constant(outside_mode, outside_scope);
  return DenoiserPolicy({{clo, chi, inside_mode, inside_scope}}, outside_mode, outside_scope);
}

void DenoiserPolicy::validate(int n_classes) const {
  check_mode(default_mode_, n_classes, "default policy");
  for (std::size_t k = 0; k < windows_.size(); ++k) {
    const Window& w = windows_[k];
    const std::string name = "window " + std::to_string(k) + " " + fmt_interval(w);
    if (!(w.t_lo < w.t_hi)) throw ConfigError(name + ": needs t_lo < t_hi");
    if (!(w.t_lo >= 0.0 && w.t_hi <= 1.0)) throw ConfigError(name + ": must lie within (0, 1]");
    check_mode(w.mode, n_classes, name);
    if (k > 0 && windows_[k - 1].t_hi > w.t_lo)
      throw ConfigError("policy windows " + fmt_interval(windows_[k - 1]) + " and " +
                        fmt_interval(w) + " overlap");
  }
}

DenoiserPolicy::Resolved DenoiserPolicy::resolve(double t) const {
  if (!(t > 0.0 && t <= 1.0)) throw ConfigError("policy time outside (0, 1]");
  for (const Window& w : windows_)
    if (t > w.t_lo && t <= w.t_hi) return {w.mode, w.scope};
  return {default_mode_, default_scope_};
}

std::string DenoiserPolicy::id() const {
  std::string out = default_mode_.label() + "-" + default_scope_.label();
  for (const Window& w : windows_)
    out += ";" + fmt_interval(w) + ":" + w.mode.label() + "-" + w.scope.label();
  return out;
}

PolicyStep::PolicyStep(const GaussianMixtureModel& m, Marginal mg, ScoreMode mode, Scope scope)
    : mode_(mode), scope_(scope) {
  if (scope.is_global()) {
    global_ = m.at(mg);
  } else {
    local_ = std::make_unique<LocalScorer>(m, mg, scope.radius);
  }
}

Eigen::VectorXd PolicyStep::score(const Eigen::VectorXd& x) const {
  return local_ ? local_->score(x, mode_) : global_->score(x, mode_);
}

ScoreEval policy_score(const GaussianMixtureModel& m, const NoiseSchedule& s,
                       const DenoiserPolicy& policy, const Eigen::VectorXd& x, double t) {
  const auto [mode, scope] = policy.resolve(t);
  const PolicyStep step(m, s.marginal(t), mode, scope);
  return {step.score(x), t, mode, scope};
}

}  // namespace critwin
