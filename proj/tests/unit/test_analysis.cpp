#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hexftc/analysis.hpp"
#include "hexftc/failure_supervisor.hpp"
#include "hexftc/vehicle_model.hpp"
#include "oracles.hpp"

#include <random>

using namespace hexftc;

namespace {

int kalman_rank(const Vec6& mask, const VehicleParams& p) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  a.topRightCorner(3, 3).setIdentity();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 6);
  b.bottomRows(3) = p.inertia.inverse() * p.thrust_coeff * mixer_matrix(p).bottomRows<3>() * mask.asDiagonal();
  Eigen::MatrixXd k(6, 36);
  Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(6, 6);
  for (int i = 0; i < 6; ++i) {
    k.middleCols(6 * i, 6) = ak * b;
    ak = ak * a;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  const auto s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i) r += s(i) > 1e-8 * s(0);
  return r;
}

}  // namespace

TEST_CASE("controllability ranks") {
  const VehicleParams p;
  for (int i = 0; i < kModelCount; ++i) {
    const auto c = controllability_single_failure(FailureMode(i), p);
    CHECK(c.rank == kalman_rank(failure_matrix(FailureMode(i)).diagonal(), p));
    CHECK(c.rank == 6);
    CHECK(c.controllable);
  }
  for (int i = 1; i <= kRotorCount; ++i) {
    Vec6 mask = Vec6::Ones();
    mask(i - 1) = 0.0;
    mask((i + 2) % 6) = 0.0;
    const auto c = controllability_paired_disable(FailureMode(i), p);
    CHECK(c.rank == kalman_rank(mask, p));
    CHECK(c.rank < 6);
    CHECK_FALSE(c.controllable);
  }
}

TEST_CASE("observer error matrix has the cubic's roots") {
  const Vec3 alpha(6, 11, 6);
  const Mat9 lam = observer_error_matrix(alpha);
  Eigen::VectorXd re = lam.eigenvalues().real();
  std::sort(re.data(), re.data() + 9);
  for (int k = 0; k < 3; ++k) {
    CHECK(re(k) == doctest::Approx(-3.0).epsilon(1e-4));
    CHECK(re(3 + k) == doctest::Approx(-2.0).epsilon(1e-4));
    CHECK(re(6 + k) == doctest::Approx(-1.0).epsilon(1e-4));
  }
  const Eigen::MatrixXd p = solve_lyapunov(lam);
  const Eigen::MatrixXd q = oracle::lyapunov_by_quadrature(lam);
  CHECK((p - q).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("bound constants") {
  const BoundParams bp = make_bound_params(Vec3(6, 11, 6), 0.01, 0.5, 5.0);
  CHECK(bp.lambda_min > 0.0);
  CHECK(bp.c == doctest::Approx(1.0 / bp.lambda_max - bp.lambda_max * 0.01 * 0.5 / bp.lambda_min));
  CHECK(bp.kappa == doctest::Approx(bp.lambda_max * 5.0 / std::sqrt(bp.lambda_min)));
  // at elapsed 0 the bound reduces to sqrt(V / lambda_min), which bounds |eta|
  CHECK(observer_error_bound(4.0, bp, 0.0) == doctest::Approx(2.0 / std::sqrt(bp.lambda_min)));
  const double tail = bp.epsilon * bp.kappa / bp.c / std::sqrt(bp.lambda_min);
  CHECK(observer_error_bound(4.0, bp, 100.0) == doctest::Approx(tail));
  const BoundParams bad = make_bound_params(Vec3(6, 11, 6), 10.0, 50.0, 5.0);
  CHECK(bad.c <= 0.0);
  CHECK_THROWS_AS(observer_error_bound(1.0, bad, 0.0), DomainError);

  CHECK(delta_max_bound(2.0, ControlGains{}, 1.0, 0.1) == doctest::Approx((0.01 * 36 + 0.1 * 13 + 1) * 2.0));
}

TEST_CASE("selection condition") {
  CHECK(selection_condition({10.0, 12.0}, 2.0, {1.0, 1.0}, 1.0));
  CHECK_FALSE(selection_condition({10.0, 5.0}, 2.0, {1.0, 1.0}, 1.0));
  CHECK(selection_condition({6.0}, 2.0, {1.0}, 1.0));
}

TEST_CASE("switching deadline with constant perturbation matches the closed form") {
  const Mat6 p = solve_lyapunov(ControlGains{}.rotational_matrix());
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(p);
  const double lmin = eig.eigenvalues()(0), l = eig.eigenvalues()(5);
  const double a = 0.01, c = 0.5;
  for (double d : {0.02, 0.05, 0.2}) {
    const double expected = oracle::deadline_constant_delta(a, c, l, lmin, d);
    const double t = max_switching_time(p, a, c, 3.0, [d](double) { return d; }, 200.0);
    if (std::isinf(expected)) {
      CHECK(std::isinf(t));
    } else {
      CHECK(t - 3.0 == doctest::Approx(expected).epsilon(1e-6));
    }
  }
  CHECK(switching_level(p, a, 3.0, 3.0, [](double) { return 1.0; }) == doctest::Approx(0.1));
  CHECK_THROWS_AS(max_switching_time(p, 1.0, 0.5, 0.0, [](double) { return 0.0; }), DomainError);
}

TEST_CASE("domain level keeps sublevel sets inside the tilt cone") {
  const Mat6 p = solve_lyapunov(ControlGains{}.rotational_matrix());
  const double min_cos = 0.5;
  const double c = domain_level(p, min_cos);
  CHECK(c > 0.0);
  // smallest V on the sphere |e| = acos(min_cos), minimizing over rates for each direction
  const Eigen::LDLT<Mat3> p22(p.bottomRightCorner<3, 3>());
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  double lowest = INFINITY;
  for (int k = 0; k < 2000; ++k) {
    Vec3 e(n(rng), n(rng), n(rng));
    e *= std::acos(min_cos) / e.norm();
    Vec6 x;
    x << e, -p22.solve(p.bottomLeftCorner<3, 3>() * e);
    lowest = std::min(lowest, x.dot(p * x));
    // and any point with V below c is inside the cone
    Vec6 y;
    y << e * std::abs(n(rng)), Vec3(n(rng), n(rng), n(rng));
    if (y.dot(p * y) < c) CHECK(std::cos(y(0)) * std::cos(y(1)) >= min_cos);
  }
  CHECK(c == doctest::Approx(lowest).epsilon(1e-9));
}

TEST_CASE("quadrature and rate estimates") {
  CHECK(integrate_adaptive([](double x) { return std::exp(-x); }, 0.0, 5.0) ==
        doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-8));
  CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-8));

  std::vector<double> t;
  std::vector<Vec3> x;
  for (int k = 0; k <= 1000; ++k) {
    t.push_back(k * 0.001);
    x.push_back(Vec3(3.0 * std::sin(5.0 * t.back()), 0, 0));
  }
  CHECK(estimate_rate_bound(t, x) == doctest::Approx(15.0).epsilon(1e-3));
}

TEST_CASE("drift Lipschitz estimate bounds a sampled difference quotient") {
  const Mat3 j = Vec3(0.02, 0.02, 0.035).asDiagonal();
  const double lip = estimate_drift_lipschitz(j, 0.5, 5.0, 5000, 3);
  CHECK(lip > 0.0);
  const Vec3 e(0.3, -0.2, 0.0), w(3.0, -2.0, 1.0), d(1e-3, 2e-3, -1e-3);
  const double q = (rotational_drift(w, e, Vec3::Zero(), j) - rotational_drift(w - d, e, Vec3::Zero(), j)).norm() /
                   d.norm();
  CHECK(q <= lip);
}
