#include "hexftc/analysis.hpp"

#include "hexftc/failure_supervisor.hpp"
#include "hexftc/vehicle_model.hpp"

#include <cmath>
#include <random>

namespace hexftc {

ControllabilityResult rotational_controllability(const Vec6& rotor_mask, const VehicleParams& params) {
  Mat6 a = Mat6::Zero();
  a.topRightCorner<3, 3>().setIdentity();
  Mat6 b = Mat6::Zero();
  b.bottomRows<3>() = params.thrust_coeff * params.inertia.inverse() * mixer_matrix(params).bottomRows<3>() *
                      rotor_mask.asDiagonal();
  Eigen::Matrix<double, 6, 36> k;
  Mat6 block = b;
  for (int j = 0; j < 6; ++j) {
    k.middleCols<6>(6 * j) = block;
    block = a * block;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 36>> svd(k);
  const auto& s = svd.singularValues();
  ControllabilityResult r;
  const double tol = 1e-8 * s(0);
  for (int j = 0; j < s.size(); ++j) r.rank += s(j) > tol ? 1 : 0;
  r.controllable = r.rank == 6;
  return r;
}

ControllabilityResult controllability_single_failure(FailureMode mode, const VehicleParams& params) {
  return rotational_controllability(failure_matrix(mode).diagonal(), params);
}

ControllabilityResult controllability_paired_disable(FailureMode mode, const VehicleParams& params) {
  if (mode.is_nominal()) throw DomainError("paired disable needs a rotor index in 1..6");
  const int i = mode.index();
  Vec6 mask = Vec6::Ones();
  mask(i - 1) = 0.0;
  mask((i <= 3 ? i + 3 : i - 3) - 1) = 0.0;
  return rotational_controllability(mask, params);
}

Mat9 observer_error_matrix(const Vec3& alpha) {
  Mat9 l = Mat9::Zero();
  for (int r = 0; r < 3; ++r) l.block<3, 3>(3 * r, 0) = -alpha(r) * Mat3::Identity();
  l.block<3, 3>(0, 3).setIdentity();
  l.block<3, 3>(3, 6).setIdentity();
  return l;
}

BoundParams make_bound_params(const Vec3& alpha, double epsilon, double lipschitz, double disturbance_rate) {
  BoundParams bp;
  bp.p_eta = solve_lyapunov(observer_error_matrix(alpha));
  const Eigen::SelfAdjointEigenSolver<Mat9> eig(bp.p_eta, Eigen::EigenvaluesOnly);
  bp.lambda_min = eig.eigenvalues()(0);
  bp.lambda_max = eig.eigenvalues()(8);
  bp.lipschitz = lipschitz;
  bp.disturbance_rate = disturbance_rate;
  bp.epsilon = epsilon;
  bp.c = 1.0 / bp.lambda_max - bp.lambda_max * epsilon * lipschitz / bp.lambda_min;
  bp.kappa = bp.lambda_max * disturbance_rate / std::sqrt(bp.lambda_min);
  return bp;
}

double observer_error_bound(double v_eta_tf, const BoundParams& bp, double elapsed) {
  if (!(bp.c > 0.0)) throw DomainError("epsilon too large for the observer error bound (c <= 0)");
  const double offset = bp.epsilon * bp.kappa / bp.c;
  return ((std::sqrt(v_eta_tf) - offset) * std::exp(-bp.c * elapsed / bp.epsilon) + offset) /
         std::sqrt(bp.lambda_min);
}

double delta_max_bound(double eta_norm, const ControlGains& gains, double lipschitz, double epsilon) {
  return (epsilon * epsilon * gains.beta1 + epsilon * (gains.beta2 + lipschitz) + 1.0) * eta_norm;
}

bool selection_condition(const std::vector<double>& sigma_m_norms, double varsigma_norm,
                         const std::vector<double>& eta3_norms, double eta3_star_norm) {
  if (sigma_m_norms.size() != eta3_norms.size()) throw DomainError("selection condition inputs differ in length");
  for (std::size_t k = 0; k < sigma_m_norms.size(); ++k) {
    if (sigma_m_norms[k] < 2.0 * varsigma_norm + eta3_norms[k] + eta3_star_norm) return false;
  }
  return true;
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  if (depth <= 0) throw QuadratureError("adaptive Simpson did not converge");
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          int max_depth) {
  if (b == a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) throw QuadratureError("integrand not finite");
  const double whole = simpson(fa, fm, fb, a, b);
  // Coarse magnitude estimate so a near-zero first Simpson panel does not force absurd tolerances.
  double scale = std::abs(whole);
  for (int k = 1; k < 16; ++k) scale = std::max(scale, std::abs(f(a + (b - a) * k / 16.0)) * std::abs(b - a));
  const double tol = std::max(rel_tol * scale, 1e-300);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double switching_level(const Mat6& p_xi, double a, double t_f, double t,
                       const std::function<double(double)>& delta_max) {
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(p_xi, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0), lmax = eig.eigenvalues()(5);
  const double rate = 1.0 / (2.0 * lmax);
  const double gain = lmax / std::sqrt(lmin);
  const double integral = integrate_adaptive(
      [&](double s) { return std::exp(-(t - s) * rate) * gain * delta_max(s); }, t_f, t);
  return std::sqrt(a) * std::exp(-(t - t_f) * rate) + integral;
}

double max_switching_time(const Mat6& p_xi, double a, double level, double t_f,
                          const std::function<double(double)>& delta_max, double horizon) {
  if (!(a >= 0.0) || !(std::sqrt(a) < level)) throw DomainError("switching deadline needs sqrt(a) < c_xi");
  auto g = [&](double t) { return switching_level(p_xi, a, t_f, t, delta_max) - level; };
  constexpr int kScan = 2000;
  double lo = t_f;
  for (int k = 1; k <= kScan; ++k) {
    double hi = t_f + horizon * k / kScan;
    if (g(hi) >= 0.0) {
      for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) >= 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    lo = hi;
  }
  return std::numeric_limits<double>::infinity();
}

double domain_level(const Mat6& p_xi, double min_cos_tilt) {
  if (!(min_cos_tilt > 0.0 && min_cos_tilt < 1.0)) throw DomainError("tilt limit must be in (0, 1)");
  const Mat3 p11 = p_xi.topLeftCorner<3, 3>();
  const Mat3 p12 = p_xi.topRightCorner<3, 3>();
  const Mat3 p22 = p_xi.bottomRightCorner<3, 3>();
  const Mat3 schur = p11 - p12 * p22.ldlt().solve(p12.transpose());
  const double r = std::acos(min_cos_tilt);
  return Eigen::SelfAdjointEigenSolver<Mat3>(schur, Eigen::EigenvaluesOnly).eigenvalues()(0) * r * r;
}

double estimate_drift_lipschitz(const Mat3& inertia, double max_tilt, double max_rate, int samples,
                                unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto rand3 = [&](double scale) -> Vec3 { return Vec3(unit(rng), unit(rng), unit(rng)) * scale; };
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    Vec3 euler = rand3(max_tilt);
    euler.z() *= M_PI / max_tilt;
    const RotationalKinematics kin(euler, inertia);
    const Vec3 w = rand3(max_rate);
    Vec3 d = rand3(max_rate);
    if (d.norm() < 1e-9) continue;
    worst = std::max(worst, (kin.drift(w) - kin.drift(w - d)).norm() / d.norm());
  }
  return 1.2 * worst;
}

double estimate_rate_bound(const std::vector<double>& t, const std::vector<Vec3>& x) {
  if (t.size() != x.size()) throw DomainError("rate bound inputs differ in length");
  double worst = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double dt = t[k] - t[k - 1];
    if (dt > 0.0) worst = std::max(worst, (x[k] - x[k - 1]).norm() / dt);
  }
  return worst;
}

}  // namespace hexftc
