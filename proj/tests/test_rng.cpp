#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "mreo/errors.hpp"
#include "mreo/rng.hpp"

using mreo::Rng;

TEST_SUITE("rng") {

TEST_CASE("same seed gives the same sequence") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  CHECK(a.draws() == 1000);
}

TEST_CASE("sub-streams for distinct purposes and indices differ") {
  std::vector<std::uint64_t> firsts;
  for (auto p : {Rng::Purpose::kInitialization, Rng::Purpose::kPartners, Rng::Purpose::kScramble,
                 Rng::Purpose::kPrediction, Rng::Purpose::kSwarm, Rng::Purpose::kUser})
    for (std::uint64_t i = 0; i < 50; ++i) firsts.push_back(Rng::stream(7, p, i).next_u64());
  std::sort(firsts.begin(), firsts.end());
  CHECK(std::adjacent_find(firsts.begin(), firsts.end()) == firsts.end());
  CHECK(Rng::stream(7, Rng::Purpose::kScramble, 3).next_u64() ==
        Rng::stream(7, Rng::Purpose::kScramble, 3).next_u64());
}

TEST_CASE("uniform draws lie in [0,1) with mean 1/2") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("below rejects a zero bound and stays in range") {
  Rng rng(3);
  CHECK_THROWS_AS(rng.below(0), mreo::InvalidParameter);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("gaussian increments: zero intensity") {
  Rng rng(5);
  const Eigen::MatrixXd z = mreo::gaussian_increments(4, Eigen::MatrixXd::Zero(3, 3), rng);
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 4);
  CHECK(z.isZero(0.0));
}

TEST_CASE("gaussian increments: moments for g = I2") {
  Rng rng(11);
  const Eigen::MatrixXd d = mreo::gaussian_increments(100000, Eigen::MatrixXd::Identity(2, 2), rng);
  const Eigen::VectorXd mean = d.rowwise().mean();
  const Eigen::MatrixXd c = d.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / static_cast<double>(d.cols() - 1);
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("gaussian increments: diagonal intensity scales variances") {
  Rng rng(12);
  const Eigen::MatrixXd g = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  const Eigen::MatrixXd d = mreo::gaussian_increments(100000, g, rng);
  const Eigen::VectorXd var =
      (d.colwise() - d.rowwise().mean()).rowwise().squaredNorm() / static_cast<double>(d.cols() - 1);
  CHECK(std::abs(var(0) / 4.0 - 1.0) < 0.05);
  CHECK(std::abs(var(1) / 9.0 - 1.0) < 0.05);
}

TEST_CASE("gaussian increments: invalid intensity") {
  Rng rng(1);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
  g(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(mreo::gaussian_increments(3, g, rng), mreo::InvalidParameter);
  CHECK_THROWS_AS(mreo::gaussian_increments(3, Eigen::MatrixXd::Ones(2, 3), rng),
                  mreo::InvalidParameter);
}

TEST_CASE("partner indices") {
  Rng rng(9);
  SUBCASE("N = 2 is forced") {
    const auto p = mreo::partner_indices(2, rng);
    CHECK(p == std::vector<Eigen::Index>{1, 0});
  }
  SUBCASE("never a fixed point") {
    for (int rep = 0; rep < 200; ++rep) {
      const auto p = mreo::partner_indices(5, rng);
      for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(p[j] != j);
        CHECK(p[j] >= 0);
        CHECK(p[j] < 5);
      }
    }
  }
  SUBCASE("reproducible for a fixed seed") {
    Rng a = Rng::stream(3, Rng::Purpose::kPartners, 1), b = Rng::stream(3, Rng::Purpose::kPartners, 1);
    CHECK(mreo::partner_indices(5, a) == mreo::partner_indices(5, b));
  }
  SUBCASE("admissible values equally likely") {
    std::vector<int> counts(4, 0);
    for (int rep = 0; rep < 40000; ++rep) ++counts[mreo::partner_indices(4, rng)[0]];
    CHECK(counts[0] == 0);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(counts[k] / 40000.0 - 1.0 / 3.0) < 0.01);
  }
  SUBCASE("derangement is a fixed-point-free permutation") {
    for (int rep = 0; rep < 100; ++rep) {
      auto p = mreo::partner_indices(6, rng, true);
      for (Eigen::Index j = 0; j < 6; ++j) CHECK(p[j] != j);
      std::sort(p.begin(), p.end());
      for (Eigen::Index j = 0; j < 6; ++j) CHECK(p[j] == j);
    }
  }
  SUBCASE("N = 1 has no partner") {
    CHECK_THROWS_AS(mreo::partner_indices(1, rng), mreo::DegenerateEnsemble);
  }
}

TEST_CASE("full permutation") {
  Rng rng(21);
  CHECK(mreo::full_permutation(1, rng) == std::vector<Eigen::Index>{0});
  CHECK_THROWS_AS(mreo::full_permutation(0, rng), mreo::InvalidParameter);

  std::map<std::vector<Eigen::Index>, int> seen;
  const int n = 100000;
  for (int k = 0; k < n; ++k) ++seen[mreo::full_permutation(3, rng)];
  CHECK(seen.size() == 6);
  for (const auto& [perm, count] : seen) CHECK(std::abs(count / double(n) - 1.0 / 6.0) < 0.01);

  auto p = mreo::full_permutation(50, rng);
  std::sort(p.begin(), p.end());
  for (Eigen::Index j = 0; j < 50; ++j) CHECK(p[j] == j);
}

TEST_CASE("uniform box") {
  Rng rng(4);
  SUBCASE("degenerate box") {
    const Eigen::Vector2d v(1.5, -2.0);
    const Eigen::MatrixXd x = mreo::uniform_box(v, v, 5, rng);
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(x.col(j) == Eigen::VectorXd(v));
  }
  SUBCASE("samples stay in the Lorenz box") {
    const Eigen::Vector3d lo(-10, -10, 0), hi(51, 60, 40);
    const Eigen::MatrixXd x = mreo::uniform_box(lo, hi, 10000, rng);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      CHECK((x.col(j).array() >= lo.array()).all());
      CHECK((x.col(j).array() <= hi.array()).all());
    }
  }
  SUBCASE("unit interval mean") {
    const Eigen::MatrixXd x =
        mreo::uniform_box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 100000, rng);
    CHECK(std::abs(x.mean() - 0.5) < 0.01);
  }
  SUBCASE("inverted bounds") {
    CHECK_THROWS_AS(mreo::uniform_box(Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0), 3, rng),
                    mreo::InvalidBounds);
  }
}

}  // TEST_SUITE
