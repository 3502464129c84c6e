#pragma once

#include <Eigen/Dense>

#include <compare>
#include <stdexcept>
#include <string>

namespace hexftc {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat46 = Eigen::Matrix<double, 4, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

inline constexpr int kRotorCount = 6;
inline constexpr int kModelCount = 7;  // nominal + one model per rotor

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Euler-angle parameterization or thrust direction is at (or too close to) a singularity.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must have full row rank (or be Hurwitz, SPD, ...) does not.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class NotHurwitzError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Failure configuration: 0 is the healthy vehicle, j in 1..6 means rotor j produces no force.
class FailureMode {
 public:
  constexpr FailureMode() = default;
  explicit FailureMode(int index) : index_(index) {
    if (index < 0 || index > kRotorCount) {
      throw DomainError("failure mode index " + std::to_string(index) + " outside 0..6");
    }
  }

  static constexpr FailureMode nominal() { return FailureMode(); }

  constexpr int index() const { return index_; }
  constexpr bool is_nominal() const { return index_ == 0; }

  friend constexpr auto operator<=>(const FailureMode&, const FailureMode&) = default;

 private:
  int index_ = 0;
};

struct VehicleParams {
  double mass = 1.5;                                   // kg
  Mat3 inertia = Vec3(0.02, 0.02, 0.035).asDiagonal();  // kg m^2
  double arm_length = 0.275;                           // m
  double thrust_coeff = 1.2e-5;                        // N s^2
  double drag_coeff = 0.02;                            // m
  double gravity = 9.81;                               // m/s^2
  double max_rotor_speed = 1000.0;                     // rad/s, both directions

  /// Throws DomainError naming the first offending field.
  void validate() const;
};

/// Truth state of the plant. Position and velocity are inertial (z down);
/// attitude is ZYX Euler angles (roll, pitch, yaw) with their time derivatives.
struct VehicleState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 euler = Vec3::Zero();
  Vec3 euler_rates = Vec3::Zero();

  Vec12 to_vector() const;
  static VehicleState from_vector(const Vec12& x);
};

/// Total thrust (N, along -body z) and body torques (N m).
struct ControlCommand {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();

  Vec4 to_vector() const { return {thrust, torque.x(), torque.y(), torque.z()}; }
  static ControlCommand from_vector(const Vec4& u) { return {u(0), u.tail<3>()}; }
};

/// Signed squared rotor speeds, entry j = sign(w_j) * w_j^2 (rad^2/s^2).
using RotorCommand = Vec6;

}  // namespace hexftc
