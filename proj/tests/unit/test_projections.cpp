#include "doctest.h"
#include "support/random_problems.hpp"

#include "dissipnet/projections.hpp"

#include <random>

using namespace dissipnet;
using namespace dissipnet::testing;

TEST_CASE("svec and smat are inverse isometries") {
  std::mt19937 rng(7);
  for (int n = 1; n <= 5; ++n) {
    Eigen::MatrixXd M = random_symmetric(rng, n);
    Eigen::VectorXd v = svec(M);
    REQUIRE(v.size() == n * (n + 1) / 2);
    CHECK(v.norm() == doctest::Approx(M.norm()).epsilon(1e-12));
    Eigen::MatrixXd back = smat(v, n);
    CHECK((back - M).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("cone projections clip the spectrum") {
  std::mt19937 rng(11);
  Eigen::MatrixXd M = random_symmetric(rng, 4, 2.0);
  Eigen::MatrixXd neg = project_nsd(M);
  Eigen::MatrixXd pos = project_psd_floor(M, 0.25);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> en(neg), ep(pos);
  CHECK(en.eigenvalues().maxCoeff() <= 1e-12);
  CHECK(ep.eigenvalues().minCoeff() >= 0.25 - 1e-12);
  // Idempotence on members of the cone.
  CHECK((project_nsd(neg) - neg).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("positive and negative parts reconstruct the matrix") {
  // Moreau-style split: M = (NSD part) + (PSD part), and the parts are
  // orthogonal in the Frobenius inner product.
  std::mt19937 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    Eigen::MatrixXd M = random_symmetric(rng, n, 3.0);
    Eigen::MatrixXd neg = project_nsd(M);
    Eigen::MatrixXd pos = project_psd_floor(M, 0.0);
    CHECK((neg + pos - M).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs((neg.transpose() * pos).trace()) < 1e-9);
  }
}

TEST_CASE("scalar affine constraint projects to its boundary") {
  // Constraint x + 1 <= 0, i.e. x <= -1; projecting 0 must give -1.
  auto map = [](const std::vector<Eigen::MatrixXd>& v) -> Eigen::MatrixXd {
    return v[0] + Eigen::MatrixXd::Identity(1, 1);
  };
  AffineConeProblem prob({VarBlock::sym(1)}, 1, map, {}, "halfline");
  ProjectionStats stats;
  Eigen::VectorXd x = prob.project(Eigen::VectorXd::Zero(1), {1e-10, 5000},
                                   nullptr, &stats);
  CHECK(stats.converged);
  CHECK(x[0] == doctest::Approx(-1.0).epsilon(1e-7));
  // A point already deep inside the set stays put.
  Eigen::VectorXd inside = Eigen::VectorXd::Constant(1, -3.0);
  Eigen::VectorXd y = prob.project(inside, {1e-10, 5000});
  CHECK(y[0] == doctest::Approx(-3.0).epsilon(1e-8));
}

TEST_CASE("floored block obeys its spectral floor") {
  // Variable (X sym 2x2) with constraint X - 4 I <= 0 and floor X >= 0.5 I:
  // the feasible set is {0.5 I <= X <= 4 I}.
  auto map = [](const std::vector<Eigen::MatrixXd>& v) -> Eigen::MatrixXd {
    return v[0] - 4.0 * Eigen::MatrixXd::Identity(2, 2);
  };
  AffineConeProblem prob({VarBlock::sym(2)}, 2, map, {{0, 0.5}}, "band");
  std::mt19937 rng(17);
  Eigen::MatrixXd seed = random_symmetric(rng, 2, 8.0);
  Eigen::VectorXd x = prob.project(prob.pack({seed}), {1e-10, 20000});
  Eigen::MatrixXd X = prob.unpack(x)[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-6);
  CHECK(es.eigenvalues().maxCoeff() <= 4.0 + 1e-6);
  // For commuting targets the projection is the eigenvalue clamp of the seed.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> seed_es(seed);
  Eigen::VectorXd clamped = seed_es.eigenvalues();
  for (int i = 0; i < 2; ++i)
    clamped[i] = std::min(4.0, std::max(0.5, clamped[i]));
  Eigen::MatrixXd expect = seed_es.eigenvectors() * clamped.asDiagonal() *
                           seed_es.eigenvectors().transpose();
  CHECK((X - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("projection satisfies the variational inequality") {
  // <seed - proj(seed), y - proj(seed)> <= 0 for any feasible y.
  std::mt19937 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    RandomConeProblem rp = random_cone_problem(rng);
    const int d = rp.prob->dim();
    Eigen::VectorXd seed = Eigen::VectorXd::NullaryExpr(d, [&rng](int) {
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      return u(rng);
    });
    const ProjectionSettings tight{1e-10, 20000};
    Eigen::VectorXd proj = rp.prob->project(seed, tight);
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(d, [&rng](int) {
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        return u(rng);
      });
      Eigen::VectorXd y = rp.prob->project(z, tight);
      const double vi = (seed - proj).dot(y - proj);
      CHECK(vi <= 1e-8);
    }
  }
}

TEST_CASE("warm-started repeat projection converges almost immediately") {
  std::mt19937 rng(29);
  RandomConeProblem rp = random_cone_problem(rng);
  Eigen::VectorXd seed =
      Eigen::VectorXd::Constant(rp.prob->dim(), 1.5);
  ProjectionState warm;
  ProjectionStats first, second;
  rp.prob->project(seed, {1e-9, 20000}, &warm, &first);
  rp.prob->project(seed, {1e-9, 20000}, &warm, &second);
  CHECK(first.converged);
  CHECK(second.converged);
  CHECK(second.iterations <= first.iterations);
  CHECK(second.iterations <= 5);
}

TEST_CASE("iteration cap returns best effort instead of throwing") {
  auto map = [](const std::vector<Eigen::MatrixXd>& v) -> Eigen::MatrixXd {
    return v[0] + Eigen::MatrixXd::Identity(1, 1);
  };
  AffineConeProblem prob({VarBlock::sym(1)}, 1, map, {}, "capped");
  ProjectionStats stats;
  Eigen::VectorXd x;
  CHECK_NOTHROW(x = prob.project(Eigen::VectorXd::Constant(1, 5.0), {1e-12, 2},
                                 nullptr, &stats));
  CHECK(!stats.converged);
  CHECK(stats.iterations == 2);
}

TEST_CASE("asymmetric map output is rejected at construction") {
  auto map = [](const std::vector<Eigen::MatrixXd>&) -> Eigen::MatrixXd {
    Eigen::MatrixXd M(2, 2);
    M << 0.0, 1.0, -1.0, 0.0;
    return M;
  };
  CHECK_THROWS_AS(AffineConeProblem({VarBlock::sym(1)}, 2, map, {}, "bad"),
                  std::invalid_argument);
}
