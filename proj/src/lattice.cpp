#include "critwin/lattice.hpp"

#include <algorithm>
#include <cstdlib>

#include "critwin/error.hpp"

namespace critwin {

namespace {

inline int wrap(int v, int n) {
  const int m = v % n;
  return m < 0 ? m + n : m;
}

inline int ring_distance(int a, int b, int n) {
  const int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

}  // namespace

LatticeSpec::LatticeSpec(Topology topology, int height, int width)
    : topology_(topology), height_(height), width_(width) {}

LatticeSpec LatticeSpec::ring(int length) {
  if (length < 1) throw InputError("ring length must be >= 1");
  return LatticeSpec(Topology::Ring1D, 1, length);
}

LatticeSpec LatticeSpec::torus(int height, int width) {
  if (height < 1 || width < 1) throw InputError("torus extents must be >= 1");
  return LatticeSpec(Topology::Torus2D, height, width);
}

std::vector<int> LatticeSpec::extent() const {
  if (topology_ == Topology::Ring1D) return {width_};
  return {height_, width_};
}

int LatticeSpec::distance(int i, int j) const {
  if (!valid_site(i) || !valid_site(j)) throw InputError("site index out of range");
  const int dr = ring_distance(i / width_, j / width_, height_);
  const int dc = ring_distance(i % width_, j % width_, width_);
  return std::max(dr, dc);
}

int LatticeSpec::diameter() const { return std::max(height_ / 2, width_ / 2); }

int LatticeSpec::translate(int i, int drow, int dcol) const {
  const int row = wrap(i / width_ + drow, height_);
  const int col = wrap(i % width_ + dcol, width_);
  return row * width_ + col;
}

int LatticeSpec::offset_index(int i, int j) const {
  const int dr = wrap(j / width_ - i / width_, height_);
  const int dc = wrap(j % width_ - i % width_, width_);
  return dr * width_ + dc;
}

std::vector<int> LatticeSpec::neighbors(int i) const {
  if (!valid_site(i)) throw InputError("site index out of range");
  std::vector<int> out;
  auto add = [&](int j) {
    if (j != i && std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  };
  add(translate(i, 0, -1));
  add(translate(i, 0, 1));
  if (topology_ == Topology::Torus2D) {
    add(translate(i, -1, 0));
    add(translate(i, 1, 0));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string LatticeSpec::describe() const {
  if (topology_ == Topology::Ring1D) return "ring-1d(" + std::to_string(width_) + ")";
  return "torus-2d(" + std::to_string(height_) + "x" + std::to_string(width_) + ")";
}

SiteSet neighborhood(const LatticeSpec& spec, std::span<const int> centers, int r) {
  if (r < 0) throw InputError("neighborhood radius must be >= 0");
  std::vector<char> hit(spec.n_sites(), 0);
  // Offsets past half the extent revisit sites already covered.
  const int rr = std::min(r, spec.height() / 2);
  const int rc = std::min(r, spec.width() / 2);
  for (int c : centers) {
    if (!spec.valid_site(c)) throw InputError("center site " + std::to_string(c) + " out of range");
    for (int dr = -rr; dr <= rr; ++dr)
      for (int dc = -rc; dc <= rc; ++dc) hit[spec.translate(c, dr, dc)] = 1;
  }
  SiteSet out;
  for (int i = 0; i < spec.n_sites(); ++i)
    if (hit[i]) out.push_back(i);
  return out;
}

Tripartition tripartition(const LatticeSpec& spec, std::span<const int> a_sites, int r) {
  if (a_sites.empty()) throw InputError("tripartition needs a nonempty A");
  Tripartition part;
  part.radius = r;
  part.a_sites.assign(a_sites.begin(), a_sites.end());
  std::sort(part.a_sites.begin(), part.a_sites.end());
  part.a_sites.erase(std::unique(part.a_sites.begin(), part.a_sites.end()), part.a_sites.end());
  const SiteSet window = neighborhood(spec, part.a_sites, r);
  std::set_difference(window.begin(), window.end(), part.a_sites.begin(), part.a_sites.end(),
                      std::back_inserter(part.b_sites));
  for (int i = 0; i < spec.n_sites(); ++i)
    if (!std::binary_search(window.begin(), window.end(), i)) part.c_sites.push_back(i);
  return part;
}

bool is_partition_of(const Tripartition& part, const LatticeSpec& spec) {
  std::vector<int> count(spec.n_sites(), 0);
  for (const SiteSet* set : {&part.a_sites, &part.b_sites, &part.c_sites})
    for (int i : *set) {
      if (!spec.valid_site(i)) return false;
      ++count[i];
    }
  return std::all_of(count.begin(), count.end(), [](int c) { return c == 1; });
}

}  // namespace critwin
