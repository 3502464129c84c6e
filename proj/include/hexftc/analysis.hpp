#pragma once

#include "hexftc/ehgo_bank.hpp"
#include "hexftc/flight_control.hpp"
#include "hexftc/types.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace hexftc {

class QuadratureError : public Error {
 public:
  using Error::Error;
};

struct ControllabilityResult {
  int rank = 0;
  bool controllable = false;
};

/// Kalman rank of the linearized rotational system (A = [[0, I], [0, 0]], B = b [0; J^-1] M_tau F)
/// under an arbitrary rotor mask. Numerical rank threshold 1e-8 * sigma_max.
ControllabilityResult rotational_controllability(const Vec6& rotor_mask, const VehicleParams& params);

ControllabilityResult controllability_single_failure(FailureMode mode, const VehicleParams& params);

/// Rotor i and its partner (i + 3 or i - 3) both disabled.
ControllabilityResult controllability_paired_disable(FailureMode mode, const VehicleParams& params);

/// Scaled observer-error matrix [[-a1 I, I, 0], [-a2 I, 0, I], [-a3 I, 0, 0]].
Mat9 observer_error_matrix(const Vec3& alpha);

/// Constants of the exponential-plus-offset observer error bound.
struct BoundParams {
  Mat9 p_eta = Mat9::Identity();
  double lipschitz = 0.0;         // L_eta
  double disturbance_rate = 0.0;  // Delta_max
  double epsilon = 0.01;
  double c = 0.0;
  double kappa = 0.0;
  double lambda_min = 1.0;  // of P_eta
  double lambda_max = 1.0;
};

/// Fills P_eta from alpha and evaluates c and kappa. Does not require c > 0.
BoundParams make_bound_params(const Vec3& alpha, double epsilon, double lipschitz, double disturbance_rate);

/// ((sqrt(V_eta(t_f)) - eps kappa / c) exp(-c (t - t_f) / eps) + eps kappa / c) / sqrt(lambda_min).
/// Throws DomainError when c <= 0.
double observer_error_bound(double v_eta_tf, const BoundParams& bp, double elapsed);

/// (eps^2 beta1 + eps (beta2 + L_eta) + 1) |eta|.
double delta_max_bound(double eta_norm, const ControlGains& gains, double lipschitz, double epsilon);

/// True iff |sigma_m(i)| >= 2 |varsigma| + |eta3(i)| + |eta3(i*)| for every wrong model i.
bool selection_condition(const std::vector<double>& sigma_m_norms, double varsigma_norm,
                         const std::vector<double>& eta3_norms, double eta3_star_norm);

/// Left side of the switching-deadline equation:
///   sqrt(a) exp(-(t - t_f) / 2 l) + int_{t_f}^t exp(-(t - s) / 2 l) (l / sqrt(lmin)) delta_max(s) ds
/// with l, lmin the extreme eigenvalues of P_xi.
double switching_level(const Mat6& p_xi, double a, double t_f, double t,
                       const std::function<double(double)>& delta_max);

/// First t in [t_f, t_f + horizon] where switching_level reaches `level`; +inf if it never does.
/// Throws DomainError unless sqrt(a) < level, QuadratureError if the integral does not converge.
double max_switching_time(const Mat6& p_xi, double a, double level, double t_f,
                          const std::function<double(double)>& delta_max, double horizon = 10.0);

/// Largest V_xi sublevel set whose attitude errors stay inside the tilt cone cos(phi) cos(theta) >= min_cos:
/// c_xi = s * acos(min_cos)^2 with s the Schur complement of the (isotropic) rate block of P_xi.
double domain_level(const Mat6& p_xi, double min_cos_tilt);

/// 1.2 x the largest |f(w) - f(w - d)| / |d| over random attitudes, rates and perturbations
/// in the given domain.
double estimate_drift_lipschitz(const Mat3& inertia, double max_tilt, double max_rate, int samples,
                                unsigned seed);

/// Largest finite-difference rate |x(k+1) - x(k)| / (t(k+1) - t(k)) along a sampled signal.
double estimate_rate_bound(const std::vector<double>& t, const std::vector<Vec3>& x);

/// Adaptive Simpson quadrature with relative tolerance; throws QuadratureError on depth exhaustion.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-8,
                          int max_depth = 40);

}  // namespace hexftc
