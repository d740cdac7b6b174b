#pragma once

#include <span>
#include <string>
#include <vector>

namespace critwin {

enum class Topology { Ring1D, Torus2D };

using SiteSet = std::vector<int>;  // sorted, unique site indices

// Periodic lattice. Sites on a torus are numbered row-major (index = row * width + col).
class LatticeSpec {
 public:
  static LatticeSpec ring(int length);
  static LatticeSpec torus(int height, int width);

  Topology topology() const { return topology_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int n_sites() const { return height_ * width_; }
  std::vector<int> extent() const;

  bool valid_site(int i) const { return i >= 0 && i < n_sites(); }
  // Chebyshev distance under periodic wraparound.
  int distance(int i, int j) const;
  // Largest pairwise distance; a radius this large covers the whole lattice.
  int diameter() const;
  // Site reached from i by shifting (drow, dcol) with wraparound. Rings use dcol only.
  int translate(int i, int drow, int dcol) const;
  // Index of the displacement from i to j, i.e. translate(0, dr, dc) for the
  // wrapped difference. Used to read stationary covariances.
  int offset_index(int i, int j) const;
  // Unique nearest neighbours (von Neumann) of a site; defines the graph Laplacian.
  std::vector<int> neighbors(int i) const;

  std::string describe() const;
  bool operator==(const LatticeSpec&) const = default;

 private:
  LatticeSpec(Topology topology, int height, int width);

  Topology topology_;
  int height_;
  int width_;
};

// All sites within Chebyshev distance r of any center, centers included.
SiteSet neighborhood(const LatticeSpec& spec, std::span<const int> centers, int r);

struct Tripartition {
  SiteSet a_sites;
  SiteSet b_sites;
  SiteSet c_sites;
  int radius = 0;
};

// A = given sites, B = r-neighbourhood of A minus A, C = remainder.
Tripartition tripartition(const LatticeSpec& spec, std::span<const int> a_sites, int r);

bool is_partition_of(const Tripartition& part, const LatticeSpec& spec);

}  // namespace critwin
