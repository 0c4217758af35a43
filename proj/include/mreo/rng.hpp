#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace mreo {

/// Seedable 64-bit random stream.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard. All
/// transformations (uniform doubles, bounded integers, normals) are done here
/// rather than through <random> distributions, so draws are identical across
/// standard library implementations.
///
/// Independent sub-streams are obtained with `Rng::stream`, which hashes
/// (seed, purpose, index) through splitmix64 into a fresh engine seed.
class Rng {
 public:
  /// Tags for the independent purposes a run draws randomness for.
  enum class Purpose : std::uint64_t {
    kInitialization = 1,
    kPartners = 2,
    kScramble = 3,
    kPrediction = 4,
    kSwarm = 5,
    kUser = 6,
  };

  explicit Rng(std::uint64_t seed = 0);

  /// Derives the sub-stream for (seed, purpose, index).
  static Rng stream(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller (the paired value is cached).
  double normal();

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// n x count matrix whose columns are independent N(0, g g^T) draws.
Eigen::MatrixXd gaussian_increments(Eigen::Index count, const Eigen::MatrixXd& intensity, Rng& rng);

/// Partner draw for coalescence: entry j is uniform on {0..N-1} \ {j}.
///
/// With `derangement` set, the result is instead a uniformly random
/// fixed-point-free permutation.
std::vector<Eigen::Index> partner_indices(Eigen::Index n, Rng& rng, bool derangement = false);

/// Uniformly random permutation of {0..N-1} (Fisher-Yates).
std::vector<Eigen::Index> full_permutation(Eigen::Index n, Rng& rng);

/// n x count matrix of coordinatewise uniform samples in [lower, upper].
Eigen::MatrixXd uniform_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            Eigen::Index count, Rng& rng);

}  // namespace mreo
