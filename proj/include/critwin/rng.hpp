#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace critwin {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Deterministic stream seed for one work unit. The tuple is folded through a
// SplitMix64 finalizer so the result depends only on the tuple, never on
// scheduling or worker count.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view experiment_tag,
                          std::uint64_t cell_index, std::uint64_t sample_index);

std::uint64_t fnv1a64(std::string_view bytes);

// Counter-based random stream. The key is the 64-bit stream seed; successive
// draws walk the counter. Normal variates use Box-Muller with both outputs kept.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);
  Eigen::VectorXd normal_vector(Eigen::Index n);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  void refill();

  std::uint64_t seed_;
  PhiloxKey key_{};
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace critwin
