#include "mreo/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mreo/errors.hpp"

namespace mreo {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)), seed_(seed) {}

Rng Rng::stream(std::uint64_t seed, Purpose purpose, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ index);
  return Rng(h);
}

std::uint64_t Rng::next_u64() {
  ++draws_;
  return engine_();
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidParameter("Rng::below: bound must be positive");
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return r % bound;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Eigen::MatrixXd gaussian_increments(Eigen::Index count, const Eigen::MatrixXd& intensity, Rng& rng) {
  if (intensity.rows() != intensity.cols())
    throw InvalidParameter("gaussian_increments: intensity matrix must be square");
  if (!intensity.allFinite())
    throw InvalidParameter("gaussian_increments: intensity matrix has non-finite entries");
  if (count < 0) throw InvalidParameter("gaussian_increments: negative column count");

  const Eigen::Index n = intensity.rows();
  Eigen::MatrixXd z(n, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index k = 0; k < n; ++k) z(k, j) = rng.normal();
  return intensity * z;
}

std::vector<Eigen::Index> partner_indices(Eigen::Index n, Rng& rng, bool derangement) {
  if (n < 2)
    throw DegenerateEnsemble("partner_indices: coalescence needs N >= 2, got N = " +
                             std::to_string(n));
  std::vector<Eigen::Index> partners(static_cast<std::size_t>(n));
  if (!derangement) {
    for (Eigen::Index j = 0; j < n; ++j) {
      auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
      partners[static_cast<std::size_t>(j)] = k < j ? k : k + 1;
    }
    return partners;
  }
  // Rejection sampling: a uniform permutation is a derangement with probability ~1/e.
  for (;;) {
    partners = full_permutation(n, rng);
    bool ok = true;
    for (Eigen::Index j = 0; j < n && ok; ++j) ok = partners[static_cast<std::size_t>(j)] != j;
    if (ok) return partners;
  }
}

std::vector<Eigen::Index> full_permutation(Eigen::Index n, Rng& rng) {
  if (n < 1) throw InvalidParameter("full_permutation: N must be at least 1");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) perm[static_cast<std::size_t>(j)] = j;
  for (Eigen::Index j = n - 1; j > 0; --j) {
    auto k = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(j + 1)));
    std::swap(perm[static_cast<std::size_t>(j)], perm[k]);
  }
  return perm;
}

Eigen::MatrixXd uniform_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            Eigen::Index count, Rng& rng) {
  if (lower.size() != upper.size())
    throw InvalidBounds("uniform_box: lower and upper have different dimensions");
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!std::isfinite(lower(k)) || !std::isfinite(upper(k)))
      throw InvalidBounds("uniform_box: non-finite bound in coordinate " + std::to_string(k));
    if (lower(k) > upper(k))
      throw InvalidBounds("uniform_box: lower > upper in coordinate " + std::to_string(k));
  }
  Eigen::MatrixXd out(lower.size(), count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index k = 0; k < lower.size(); ++k)
      out(k, j) = lower(k) + (upper(k) - lower(k)) * rng.uniform();
  return out;
}

}  // namespace mreo
