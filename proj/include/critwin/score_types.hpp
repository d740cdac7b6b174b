#pragma once

#include <string>

#include <Eigen/Core>

namespace critwin {

// Which score a denoiser uses: unconditional, conditional on class y, or
// classifier-free guidance mixing the two with weight w.
struct ScoreMode {
  enum class Kind { Uncond, Cond, Cfg };
  Kind kind = Kind::Uncond;
  int y = 0;
  double w = 0.0;

  static ScoreMode uncond() { return {}; }
  static ScoreMode cond(int y) { return {Kind::Cond, y, 1.0}; }
  static ScoreMode cfg(int y, double w) { return {Kind::Cfg, y, w}; }

  std::string label() const;
  bool operator==(const ScoreMode&) const = default;
};

// Global score or the exact radius-r local score.
struct Scope {
  int radius = -1;  // < 0 means global

  static Scope global() { return {}; }
  static Scope local(int r) { return {r}; }
  bool is_global() const { return radius < 0; }

  std::string label() const;
  bool operator==(const Scope&) const = default;
};

struct ScoreEval {
  Eigen::VectorXd vector;
  double t = 0.0;
  ScoreMode mode;
  Scope scope;
};

}  // namespace critwin
