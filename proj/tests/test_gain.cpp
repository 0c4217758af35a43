#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mreo/errors.hpp"
#include "mreo/gain.hpp"
#include "mreo/rng.hpp"

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, mreo::Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = 2 * rng.uniform() - 1;
  return m;
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace

TEST_SUITE("gain") {

TEST_CASE("build innovations") {
  SUBCASE("hand example") {
    Eigen::MatrixXd x(1, 2);
    x << 0, 2;
    const auto in = mreo::build_innovations(x, Eigen::Vector2d(1, 5), 1.0, {1, 0});
    Eigen::MatrixXd expected(2, 2);
    expected << 0, -4, 2, -2;
    CHECK(in == expected);
  }
  SUBCASE("fully coalesced") {
    const auto in = mreo::build_innovations(Eigen::MatrixXd::Constant(2, 3, 4.0),
                                            Eigen::Vector3d::Constant(1.5), 1.5, {1, 2, 0});
    CHECK(in.isZero(0.0));
  }
  SUBCASE("arg-min particle has the largest cost innovation") {
    mreo::Rng rng(3);
    const Eigen::MatrixXd x = random_matrix(2, 6, rng);
    const Eigen::VectorXd f = random_matrix(6, 1, rng);
    Eigen::Index arg = 0;
    const double fmin = f.minCoeff(&arg);
    const auto p = mreo::partner_indices(6, rng);
    const auto in = mreo::build_innovations(x, f, fmin, p);
    CHECK(in(0, arg) == 0.0);
    CHECK(in.row(0).maxCoeff() == 0.0);
    for (Eigen::Index j = 0; j < 6; ++j) {
      CHECK(in.col(j).tail(2) == x.col(p[j]) - x.col(j));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(mreo::build_innovations(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), 0, {0}),
                    mreo::DegenerateEnsemble);
    CHECK_THROWS_AS(mreo::build_innovations(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(2), 0, {0, 0}),
                    mreo::InvalidArgument);
  }
}

TEST_CASE("noise block") {
  const mreo::NoiseBlock nb(2.0, Eigen::Vector2d(3.0, 4.0));
  Eigen::MatrixXd expected = Eigen::Vector3d(4, 9, 16).asDiagonal();
  CHECK(nb.matrix() == expected);
  CHECK(nb.size() == 3);
  CHECK_THROWS_AS(mreo::NoiseBlock(0.0, Eigen::Vector2d(1, 1)), mreo::InvalidParameter);
  CHECK_THROWS_AS(mreo::NoiseBlock(1.0, Eigen::Vector2d(1, -1)), mreo::InvalidParameter);
  CHECK_THROWS_AS(mreo::NoiseBlock(Eigen::MatrixXd::Zero(2, 2)), mreo::InvalidParameter);
}

TEST_CASE("blended covariance") {
  const mreo::NoiseBlock nb(0.5, Eigen::Vector2d(0.2, 0.3));
  SUBCASE("identical columns leave only the noise block") {
    const Eigen::MatrixXd in = Eigen::Vector3d(1, 2, 3).replicate(1, 4);
    CHECK(rel(mreo::blended_covariance(in, 0.8, nb), 0.2 * nb.matrix()) < 1e-15);
  }
  SUBCASE("small alpha approaches the noise block") {
    mreo::Rng rng(1);
    const Eigen::MatrixXd in = random_matrix(3, 5, rng);
    CHECK(rel(mreo::blended_covariance(in, 1e-12, nb), nb.matrix()) < 1e-10);
  }
  SUBCASE("brute-force two-pass covariance") {
    mreo::Rng rng(2);
    const Eigen::MatrixXd in = random_matrix(3, 3, rng);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
    double mean[3] = {0, 0, 0};
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j < 3; ++j) mean[a] += in(a, j);
      mean[a] /= 3;
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        for (int j = 0; j < 3; ++j) s(a, b) += (in(a, j) - mean[a]) * (in(b, j) - mean[b]);
        s(a, b) /= 2;
      }
    const Eigen::MatrixXd expected = 0.7 * s + 0.3 * nb.matrix();
    const Eigen::MatrixXd got = mreo::blended_covariance(in, 0.7, nb);
    CHECK(rel(got, expected) < 1e-12);
    CHECK(got == got.transpose());
    CHECK(Eigen::LLT<Eigen::MatrixXd>(got).info() == Eigen::Success);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(mreo::blended_covariance(Eigen::MatrixXd::Zero(3, 1), 0.5, nb), mreo::DegenerateEnsemble);
    CHECK_THROWS_AS(mreo::blended_covariance(Eigen::MatrixXd::Zero(3, 2), 1.0, nb), mreo::InvalidParameter);
    CHECK_THROWS_AS(mreo::blended_covariance(Eigen::MatrixXd::Zero(2, 2), 0.5, nb), mreo::InvalidArgument);
  }
}

TEST_CASE("regularized inverse") {
  CHECK(rel(mreo::regularized_inverse(Eigen::MatrixXd::Identity(3, 3)), Eigen::MatrixXd::Identity(3, 3)) < 1e-15);

  const Eigen::MatrixXd singular = Eigen::Vector2d(1, 0).asDiagonal();
  const Eigen::MatrixXd inv = mreo::regularized_inverse(singular);
  CHECK(inv.allFinite());
  CHECK(inv.norm() < 1e12);

  mreo::Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd a = random_matrix(4, 4, rng);
    const Eigen::MatrixXd spd = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4);
    CHECK((spd * mreo::regularized_inverse(spd) - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-8);
  }

  // Rows on very different scales, as with large cost penalties.
  const Eigen::MatrixXd scaled = Eigen::Vector3d(1e30, 1e-2, 4e-2).asDiagonal();
  CHECK((scaled * mreo::regularized_inverse(scaled) - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
}

TEST_CASE("gain shape and degenerate ensemble") {
  mreo::Rng rng(7);
  const Eigen::MatrixXd x = random_matrix(2, 5, rng), xp = random_matrix(2, 5, rng);
  const Eigen::MatrixXd f = random_matrix(3, 5, rng), fp = random_matrix(3, 5, rng);
  const Eigen::MatrixXd cov = mreo::blended_covariance(f, 0.8, mreo::NoiseBlock(0.1, Eigen::Vector2d(0.1, 0.1)));
  const auto g = mreo::gain({xp, x, fp, f, f - fp, 1.0, 1.0 + 1e-7, cov});
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 3);
  CHECK(g.allFinite());

  const Eigen::MatrixXd same = Eigen::Vector2d(1, 2).replicate(1, 5);
  const Eigen::MatrixXd flat = Eigen::Vector3d(0.5, 1, 1).replicate(1, 5);
  const auto g0 = mreo::gain({same, same, flat, flat, Eigen::MatrixXd::Zero(3, 5), 1.0, 1.0 + 1e-7, cov});
  CHECK(g0.isZero(0.0));

  CHECK_THROWS_AS(mreo::gain({xp, x, fp, f, f, 1.0, 1.0, Eigen::MatrixXd::Identity(2, 2)}), mreo::InvalidArgument);
  CHECK_THROWS_AS(mreo::gain({xp.leftCols(4), x, fp, f, f, 1.0, 1.0, cov}), mreo::InvalidArgument);
}

TEST_CASE("gain cost scaling") {
  // Scaling costs by c with the noise block's cost entry scaled by c^2 leaves
  // the cost-row correction invariant and divides the cost column of the gain by c.
  mreo::Rng rng(9);
  const Eigen::MatrixXd x = random_matrix(1, 6, rng), xp = random_matrix(1, 6, rng);
  Eigen::MatrixXd f = random_matrix(2, 6, rng), fp = random_matrix(2, 6, rng);
  const double c = 8.0;
  auto run = [&](double scale) {
    Eigen::MatrixXd fs = f, fps = fp;
    fs.row(0) *= scale;
    fps.row(0) *= scale;
    const auto cov = mreo::blended_covariance(fs, 0.8, mreo::NoiseBlock(0.3 * scale, Eigen::VectorXd::Constant(1, 0.2)));
    return std::pair{mreo::gain({xp, x, fps, fs, fs - fps, 1.0, 1.0 + 1e-7, cov}), fs};
  };
  const auto [g1, f1] = run(1.0);
  const auto [gc, fc] = run(c);
  CHECK(gc(0, 0) == doctest::Approx(g1(0, 0) / c).epsilon(1e-9));
  CHECK(gc(0, 1) == doctest::Approx(g1(0, 1)).epsilon(1e-9));
  CHECK(rel(mreo::corrections(gc, 1.0, fc), mreo::corrections(g1, 1.0, f1)) < 1e-9);
}

TEST_CASE("functional matrix and increment") {
  Eigen::MatrixXd in(2, 2);
  in << -1, -3, 2, -2;
  CHECK(mreo::functional_matrix(mreo::FunctionalForm::kInnovation, in, 4.0) == in);
  Eigen::MatrixXd h(2, 2);
  h << 5, 7, -2, 2;
  CHECK(mreo::functional_matrix(mreo::FunctionalForm::kObservation, in, 4.0) == h);

  Eigen::MatrixXd prev = Eigen::MatrixXd::Ones(2, 2);
  CHECK(mreo::gain_increment(mreo::IncrementForm::kInnovationDifference, in, prev, 4.0, 0.5) == in - prev);
  Eigen::MatrixXd drift(2, 2);
  drift << 2, 2, 0, 0;
  CHECK(mreo::gain_increment(mreo::IncrementForm::kExtremalDrift, in, prev, 4.0, 0.5) == drift);
  CHECK_THROWS_AS(mreo::gain_increment(mreo::IncrementForm::kExtremalDrift, in, Eigen::MatrixXd::Ones(2, 3), 1, 1),
                  mreo::InvalidArgument);
}

TEST_CASE("corrections") {
  mreo::Rng rng(10);
  const Eigen::MatrixXd g = random_matrix(2, 3, rng), in = random_matrix(3, 5, rng);
  CHECK(mreo::corrections(g, 0.0, in).isZero(0.0));
  CHECK(mreo::corrections(g, 0.7, Eigen::MatrixXd::Zero(3, 5)).isZero(0.0));
  const Eigen::MatrixXd d = mreo::corrections(g, 0.7, in);
  for (int j = 0; j < 5; ++j)
    for (int r = 0; r < 2; ++r) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += g(r, k) * in(k, j);
      CHECK(d(r, j) == doctest::Approx(0.7 * s).epsilon(1e-14));
    }
  CHECK_THROWS_AS(mreo::corrections(g, 1.0, random_matrix(2, 5, rng)), mreo::InvalidArgument);
}

TEST_CASE("scramble") {
  Eigen::MatrixXd d(2, 3);
  d << 1, 2, 3, 4, 5, 6;
  CHECK(mreo::scramble(d, {0, 1, 2}) == d);
  Eigen::MatrixXd shifted(2, 3);
  shifted << 2, 3, 1, 5, 6, 4;
  CHECK(mreo::scramble(d, {1, 2, 0}) == shifted);
  CHECK_THROWS_AS(mreo::scramble(d, {0, 0, 1}), mreo::InvalidPermutation);
  CHECK_THROWS_AS(mreo::scramble(d, {0, 1}), mreo::InvalidPermutation);
  CHECK_THROWS_AS(mreo::scramble(d, {0, 1, 3}), mreo::InvalidPermutation);
}

TEST_CASE("perturbation index") {
  CHECK(mreo::perturbation_index(mreo::NoiseBlock(0.125, Eigen::VectorXd::Constant(1, 0.0625))) == 64);
  CHECK(mreo::perturbation_index(mreo::NoiseBlock(10.0, Eigen::VectorXd::Constant(1, 1.0))) == 0);
  CHECK(mreo::perturbation_index(mreo::NoiseBlock(1e-12, Eigen::VectorXd::Constant(1, 1e-12))) ==
        std::numeric_limits<std::int64_t>::max());
}

}  // TEST_SUITE
