#pragma once

#include "hexftc/types.hpp"

#include <array>
#include <optional>

namespace hexftc {

/// minimize |f|^2 + lambda |W (B f - u)|^2  subject to  lower <= f <= upper.
struct AllocationProblem {
  Mat46 effectiveness = Mat46::Zero();  // B = M F
  Vec4 desired = Vec4::Zero();          // (u_f, tau)
  Vec4 weights = Vec4(10.0, 10.0, 10.0, 1.0);
  double lambda = 1e4;
  Vec6 lower = Vec6::Zero();
  Vec6 upper = Vec6::Zero();

  void validate() const;
  /// Hessian 2 (I + lambda B^T W^2 B).
  Mat6 hessian() const;
  /// Linear term -2 lambda B^T W^2 u.
  Vec6 linear_term() const;
  double objective(const Vec6& f) const;
};

struct AllocationResult {
  Vec6 forces = Vec6::Zero();
  int iterations = 0;
  bool converged = false;
};

/// Rotor that is driven in reverse after rotor `mode` fails: i+1 for i <= 3, i-3 otherwise.
int opposite_rotor(FailureMode mode);

struct ForceBounds {
  Vec6 lower;
  Vec6 upper;
};

/// Failed rotor pinned to 0, opposite rotor in [-f_down, -delta], the rest in [0, f_up].
/// Nominal mode: every rotor in [0, f_up]. `opposite` overrides the default pairing.
ForceBounds build_failure_bounds(FailureMode mode, double f_down, double f_up, double delta = 0.01,
                                 std::optional<int> opposite = std::nullopt);

/// Primal active-set solve. `warm_start` is clamped into the box first.
AllocationResult allocate(const AllocationProblem& problem, const std::optional<Vec6>& warm_start = std::nullopt,
                          int max_iterations = 50);

/// Largest violation of the box KKT conditions, divided by max(1, |H|_inf).
double kkt_residual(const AllocationProblem& problem, const Vec6& f);

struct AllocatorConfig {
  double lambda = 1e4;
  Vec4 weights = Vec4(10.0, 10.0, 10.0, 1.0);
  double delta = 0.01;          // N
  double down_fraction = 0.6;   // f_down = down_fraction * f_up
  int max_iterations = 50;
  std::array<int, kRotorCount> opposite{2, 3, 4, 1, 2, 3};

  void validate() const;
};

/// Stateful allocator for the control loop: builds the problem for the selected model and
/// warm-starts from the previous solution.
class Allocator {
 public:
  Allocator(AllocatorConfig config, VehicleParams params);

  /// Returns signed squared rotor speeds (f / b).
  RotorCommand allocate(const ControlCommand& u_hat, FailureMode mode);
  const AllocationResult& last() const { return last_; }
  AllocationProblem problem(const ControlCommand& u_hat, FailureMode mode) const;

 private:
  AllocatorConfig cfg_;
  VehicleParams params_;
  AllocationResult last_;
  std::optional<Vec6> warm_;
  std::optional<FailureMode> warm_mode_;
};

}  // namespace hexftc
