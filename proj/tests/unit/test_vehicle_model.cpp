#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hexftc/vehicle_model.hpp"
#include "oracles.hpp"

#include <random>

using namespace hexftc;

namespace {

// Euler rates -> body rates for ZYX angles, written out by hand.
Mat3 body_rate_map(const Vec3& e) {
  const double sp = std::sin(e.x()), cp = std::cos(e.x()), st = std::sin(e.y()), ct = std::cos(e.y());
  Mat3 w;
  w << 1, 0, -st, 0, cp, sp * ct, 0, -sp, cp * ct;
  return w;
}

Vec3 random_attitude(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Vec3(0.8 * u(rng), 0.8 * u(rng), 3.0 * u(rng));
}

}  // namespace

TEST_CASE("euler rate matrix inverts the body-rate map") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vec3 e = random_attitude(rng);
    CHECK((euler_rate_matrix(e) * body_rate_map(e) - Mat3::Identity()).norm() < 1e-12);
  }
  CHECK_THROWS_AS(euler_rate_matrix(Vec3(0.1, M_PI / 2, 0.0)), SingularityError);
}

TEST_CASE("euler rate matrix derivative matches central differences") {
  std::mt19937_64 rng(2);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const Vec3 e = random_attitude(rng), rates = random_attitude(rng);
    const Mat3 fd = (euler_rate_matrix(e + h * rates) - euler_rate_matrix(e - h * rates)) / (2 * h);
    CHECK((euler_rate_matrix_derivative(e, rates) - fd).norm() < 1e-7);
  }
}

TEST_CASE("rotation matrix is a proper rotation with the right third column") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Vec3 e = random_attitude(rng);
    const Mat3 r = rotation_matrix(e);
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0));
    CHECK((r.col(2) - rotation_third_column(e)).norm() < 1e-14);
    const Mat3 ref = (Eigen::AngleAxisd(e.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(e.y(), Vec3::UnitY()) *
                      Eigen::AngleAxisd(e.x(), Vec3::UnitX()))
                         .toRotationMatrix();
    CHECK((r - ref).norm() < 1e-12);
  }
}

TEST_CASE("rotational drift equals the Euler-angle acceleration of a torque-free body") {
  const Mat3 j = Vec3(0.02, 0.025, 0.035).asDiagonal();
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const Vec3 e = random_attitude(rng), rates = random_attitude(rng);
    // body rate and its derivative from Euler's equation with no torque
    const Vec3 w = body_rate_map(e) * rates;
    const Vec3 w_dot = -j.inverse() * w.cross(j * w);
    // theta'' = d/dt (Psi(theta) w)
    const Mat3 psi_dot =
        (euler_rate_matrix(e + h * rates) - euler_rate_matrix(e - h * rates)) / (2 * h);
    const Vec3 expected = psi_dot * w + euler_rate_matrix(e) * w_dot;
    const Vec3 split = Vec3(0.3, -0.2, 0.1);
    CHECK((rotational_drift(rates - split, e, split, j) - expected).norm() < 1e-6);
  }
}

TEST_CASE("input gain is Psi J^-1") {
  const VehicleParams p;
  const Vec3 e(0.2, -0.3, 1.0);
  CHECK((input_gain(e, p.inertia) - body_rate_map(e).inverse() * p.inertia.inverse()).norm() < 1e-10);
}

TEST_CASE("mixer and actuators") {
  const VehicleParams p;
  const Mat46 m = mixer_matrix(p);
  CHECK(m.fullPivLu().rank() == 4);
  // symmetric layout: no net torque from equal forces
  CHECK(m.row(1).sum() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.row(2).sum() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.row(3).sum() == doctest::Approx(0.0).epsilon(1e-15));

  const RotorCommand hover = RotorCommand::Constant(p.mass * p.gravity / (6 * p.thrust_coeff));
  const ControlCommand u = apply_actuators(hover, FailureMode::nominal(), p);
  CHECK(u.thrust == doctest::Approx(p.mass * p.gravity));
  CHECK(u.torque.norm() < 1e-12);

  for (int i = 1; i <= 6; ++i) {
    const Mat6 f = failure_matrix(FailureMode(i));
    CHECK(f(i - 1, i - 1) == 0.0);
    CHECK(f.trace() == 5.0);
    const ControlCommand ui = apply_actuators(hover, FailureMode(i), p);
    CHECK(ui.thrust == doctest::Approx(5.0 / 6.0 * p.mass * p.gravity));
  }
  CHECK_THROWS_AS(FailureMode(7), DomainError);
}

TEST_CASE("model mismatch vanishes for the right model and is linear in the command") {
  const VehicleParams p;
  RotorCommand w;
  w << 4e5, 3e5, 5e5, 2e5, 4.5e5, 3.5e5;
  const Vec3 e(0.1, 0.05, 0.3);
  for (int i = 0; i < 7; ++i) CHECK(model_mismatch(w, FailureMode(i), FailureMode(i), e, p).norm() == 0.0);
  const Vec3 a = model_mismatch(w, FailureMode(0), FailureMode(3), e, p);
  const Vec3 b = model_mismatch(2.0 * w, FailureMode(0), FailureMode(3), e, p);
  CHECK((b - 2.0 * a).norm() < 1e-9 * a.norm());
  // Healthy model while rotor 3 is gone: the model over-predicts by rotor 3's torque.
  Mat36 mt = mixer_matrix(p).bottomRows<3>();
  const Vec3 expected = -input_gain(e, p.inertia) * p.thrust_coeff * mt.col(2) * w(2);
  CHECK((a - expected).norm() < 1e-9 * expected.norm());
}

TEST_CASE("saturation clamps squared speeds symmetrically") {
  const VehicleParams p;
  RotorCommand w;
  w << 2e6, -2e6, 5e5, -5e5, 1e6, -1e6;
  const RotorCommand s = saturate_rotor_command(w, p);
  CHECK(s(0) == 1e6);
  CHECK(s(1) == -1e6);
  CHECK(s(2) == 5e5);
  CHECK(s(3) == -5e5);
}

TEST_CASE("plant derivative at hover is at rest") {
  const VehicleParams p;
  VehicleState s;
  const RotorCommand hover = RotorCommand::Constant(p.mass * p.gravity / (6 * p.thrust_coeff));
  const Vec12 dx = plant_derivative(s, hover, FailureMode::nominal(), DisturbanceSignal::none(), 0.0, p);
  CHECK(dx.norm() < 1e-12);

  // A constant rotational disturbance shows up directly as Euler acceleration at rest.
  DisturbanceSignal d = DisturbanceSignal::none();
  d.rotational = [](double) { return Vec3(1.0, -2.0, 0.5); };
  const Vec12 dd = plant_derivative(s, hover, FailureMode::nominal(), d, 0.0, p);
  CHECK((dd.segment<3>(9) - Vec3(1.0, -2.0, 0.5)).norm() < 1e-12);

  // Rolled right, thrust pushes toward +y (z down).
  s.euler = Vec3(0.1, 0.0, 0.0);
  const Vec12 dt = plant_derivative(s, hover, FailureMode::nominal(), DisturbanceSignal::none(), 0.0, p);
  CHECK(dt(4) == doctest::Approx(p.gravity * std::sin(0.1)));
}

TEST_CASE("parameter validation") {
  VehicleParams p;
  CHECK_NOTHROW(p.validate());
  p.mass = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("state vector round trip") {
  VehicleState s;
  s.position = Vec3(1, 2, 3);
  s.velocity = Vec3(4, 5, 6);
  s.euler = Vec3(0.1, 0.2, 0.3);
  s.euler_rates = Vec3(-1, -2, -3);
  const VehicleState t = VehicleState::from_vector(s.to_vector());
  CHECK((t.to_vector() - s.to_vector()).norm() == 0.0);
}
