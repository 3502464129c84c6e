#include "hexftc/failure_supervisor.hpp"

#include <cmath>

namespace hexftc {

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) throw DomainError("Lyapunov equation needs a square matrix");
  if (!a.allFinite()) throw DomainError("Lyapunov matrix has non-finite entries");
  const Eigen::VectorXcd ev = a.eigenvalues();
  if (ev.real().maxCoeff() >= 0.0) throw NotHurwitzError("matrix is not Hurwitz");

  // vec(PA + A^T P) = (A^T (x) I + I (x) A^T) vec(P)
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd at = a.transpose();
  Eigen::MatrixXd k(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = at(i, j) * id + (i == j ? at : Eigen::MatrixXd::Zero(n, n));
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(id.data(), n * n);
  const Eigen::VectorXd x = k.fullPivLu().solve(rhs);
  Eigen::MatrixXd p = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (p + p.transpose());
}

double lyapunov_derivative_estimate(const Vec6& xi, const Vec6& xi_dot, const Mat6& p) {
  return 2.0 * xi.dot(p * xi_dot);
}

bool detect(double v_dot, double xi_norm_sq, double a0) { return v_dot > a0 - xi_norm_sq; }

FailureMode select_model(const std::array<double, kRotorCount>& norms) {
  int best = 0;
  for (int j = 1; j < kRotorCount; ++j) {
    if (norms[j] < norms[best]) best = j;
  }
  return FailureMode(best + 1);
}

const char* to_string(SupervisorPhase phase) {
  switch (phase) {
    case SupervisorPhase::Nominal: return "NOMINAL";
    case SupervisorPhase::Armed: return "ARMED";
    case SupervisorPhase::Switched: return "SWITCHED";
  }
  return "?";
}

Supervisor::Supervisor(SupervisorConfig config, const Mat6& a_xi) : cfg_(config) {
  if (!std::isfinite(cfg_.a0) || cfg_.a0 <= 0.0) throw DomainError("supervisor.a0 must be positive");
  if (!std::isfinite(cfg_.dwell) || cfg_.dwell < 0.0) throw DomainError("supervisor.dwell must be nonnegative");
  p_ = solve_lyapunov(a_xi);
}

FailureMode Supervisor::tick(const EhgoBank& bank, double t) {
  if (phase_ == SupervisorPhase::Switched) return selected_;

  const ExtendedEstimate& nominal = bank.estimate(FailureMode::nominal());
  const Vec18& d = bank.derivative(FailureMode::nominal());
  const Vec6 xi = nominal.rotational_error();
  Vec6 xi_dot;
  xi_dot << d.segment<3>(9), d.segment<3>(12);
  signal_.v_dot = lyapunov_derivative_estimate(xi, xi_dot, p_);
  signal_.xi_norm_sq = xi.squaredNorm();
  signal_.flag = t >= cfg_.start_time && detect(signal_.v_dot, signal_.xi_norm_sq, cfg_.a0);

  if (!signal_.flag) {
    phase_ = SupervisorPhase::Nominal;
    return selected_;
  }
  if (!t_detect_) t_detect_ = t;
  if (!cfg_.enabled) return selected_;
  if (phase_ == SupervisorPhase::Nominal) {
    phase_ = SupervisorPhase::Armed;
    t_armed_ = t;
  }
  if (t - *t_armed_ >= cfg_.dwell - 1e-9) {
    std::array<double, kRotorCount> norms{};
    for (int j = 0; j < kRotorCount; ++j) norms[j] = bank.estimate(FailureMode(j + 1)).rot_disturbance.norm();
    selected_ = select_model(norms);
    phase_ = SupervisorPhase::Switched;
    t_switch_ = t;
  }
  return selected_;
}

}  // namespace hexftc
