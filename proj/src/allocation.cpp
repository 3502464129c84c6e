#include "hexftc/allocation.hpp"

#include "hexftc/vehicle_model.hpp"

#include <cmath>
#include <limits>

namespace hexftc {

void AllocationProblem::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("allocation.lambda must be positive");
  if (!(weights.array() > 0.0).all()) throw DomainError("allocation.weights must be positive");
  if (!(lower.array() <= upper.array()).all()) throw DomainError("allocation bounds have lower > upper");
  if (!effectiveness.allFinite() || !desired.allFinite()) throw DomainError("allocation problem is not finite");
}

Mat6 AllocationProblem::hessian() const {
  const Eigen::Matrix4d w2 = weights.array().square().matrix().asDiagonal();
  return 2.0 * (Mat6::Identity() + lambda * effectiveness.transpose() * w2 * effectiveness);
}

Vec6 AllocationProblem::linear_term() const {
  return -2.0 * lambda * effectiveness.transpose() * weights.array().square().matrix().asDiagonal() * desired;
}

double AllocationProblem::objective(const Vec6& f) const {
  return f.squaredNorm() + lambda * weights.cwiseProduct(effectiveness * f - desired).squaredNorm();
}

int opposite_rotor(FailureMode mode) {
  if (mode.is_nominal()) throw DomainError("the nominal configuration has no opposite rotor");
  const int i = mode.index();
  return i <= 3 ? i + 1 : i - 3;
}

ForceBounds build_failure_bounds(FailureMode mode, double f_down, double f_up, double delta,
                                 std::optional<int> opposite) {
  if (!(f_up >= 0.0) || !(f_down >= delta) || !(delta > 0.0)) {
    throw DomainError("force bounds need f_up >= 0 and f_down >= delta > 0");
  }
  ForceBounds b{Vec6::Zero(), Vec6::Constant(f_up)};
  if (mode.is_nominal()) return b;
  const int j = opposite.value_or(opposite_rotor(mode));
  if (j < 1 || j > kRotorCount || j == mode.index()) throw DomainError("invalid opposite rotor");
  b.upper(mode.index() - 1) = 0.0;
  b.lower(j - 1) = -f_down;
  b.upper(j - 1) = -delta;
  return b;
}

namespace {

enum class Bound : char { Free, Lower, Upper, Fixed };

}  // namespace

AllocationResult allocate(const AllocationProblem& problem, const std::optional<Vec6>& warm_start,
                          int max_iterations) {
  problem.validate();
  const Mat6 h = problem.hessian();
  const Vec6 c = problem.linear_term();
  const Vec6& lo = problem.lower;
  const Vec6& hi = problem.upper;

  Vec6 x = warm_start.value_or(Vec6::Zero()).cwiseMax(lo).cwiseMin(hi);
  std::array<Bound, kRotorCount> ws{};
  for (int k = 0; k < kRotorCount; ++k) {
    if (lo(k) == hi(k)) ws[k] = Bound::Fixed;
    else if (x(k) == lo(k)) ws[k] = Bound::Lower;
    else if (x(k) == hi(k)) ws[k] = Bound::Upper;
    else ws[k] = Bound::Free;
  }

  AllocationResult res;
  bool at_subspace_min = false;
  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    const Vec6 g = h * x + c;
    if (!at_subspace_min) {
      std::array<int, kRotorCount> free{};
      int nf = 0;
      for (int k = 0; k < kRotorCount; ++k) {
        if (ws[k] == Bound::Free) free[nf++] = k;
      }
      Vec6 p = Vec6::Zero();
      if (nf > 0) {
        Eigen::MatrixXd hff(nf, nf);
        Eigen::VectorXd gf(nf);
        for (int a = 0; a < nf; ++a) {
          gf(a) = g(free[a]);
          for (int b = 0; b < nf; ++b) hff(a, b) = h(free[a], free[b]);
        }
        const Eigen::VectorXd pf = hff.llt().solve(-gf);
        for (int a = 0; a < nf; ++a) p(free[a]) = pf(a);
      }
      double alpha = 1.0;
      int blocking = -1;
      for (int k = 0; k < kRotorCount; ++k) {
        if (ws[k] != Bound::Free) continue;
        if (p(k) < 0.0 && lo(k) - x(k) > alpha * p(k)) {
          alpha = (lo(k) - x(k)) / p(k);
          blocking = k;
        } else if (p(k) > 0.0 && hi(k) - x(k) < alpha * p(k)) {
          alpha = (hi(k) - x(k)) / p(k);
          blocking = k;
        }
      }
      x += alpha * p;
      x = x.cwiseMax(lo).cwiseMin(hi);
      if (blocking >= 0) {
        const bool low = p(blocking) < 0.0;
        x(blocking) = low ? lo(blocking) : hi(blocking);
        ws[blocking] = low ? Bound::Lower : Bound::Upper;
        continue;
      }
      at_subspace_min = true;
      continue;
    }
    // Multipliers of the active bounds: lower needs g >= 0, upper needs g <= 0.
    int release = -1;
    double worst = 0.0;
    for (int k = 0; k < kRotorCount; ++k) {
      const double viol = ws[k] == Bound::Lower ? -g(k) : ws[k] == Bound::Upper ? g(k) : 0.0;
      if (viol > worst) {
        worst = viol;
        release = k;
      }
    }
    if (release < 0) {
      res.converged = true;
      break;
    }
    ws[release] = Bound::Free;
    at_subspace_min = false;
  }
  res.iterations = std::min(res.iterations, max_iterations);
  res.forces = x;
  return res;
}

double kkt_residual(const AllocationProblem& problem, const Vec6& f) {
  const Mat6 h = problem.hessian();
  const Vec6 g = h * f + problem.linear_term();
  double worst = 0.0;
  for (int k = 0; k < kRotorCount; ++k) {
    const double lo = problem.lower(k), hi = problem.upper(k);
    double r;
    if (f(k) < lo || f(k) > hi) r = std::numeric_limits<double>::infinity();
    else if (lo == hi) r = 0.0;
    else if (f(k) == lo) r = std::max(0.0, -g(k));
    else if (f(k) == hi) r = std::max(0.0, g(k));
    else r = std::abs(g(k));
    worst = std::max(worst, r);
  }
  const double scale = std::max(1.0, h.cwiseAbs().rowwise().sum().maxCoeff());
  return worst / scale;
}

void AllocatorConfig::validate() const {
  if (!(lambda > 0.0)) throw DomainError("allocation.lambda must be positive");
  if (!(weights.array() > 0.0).all()) throw DomainError("allocation.weights must be positive");
  if (!(delta > 0.0)) throw DomainError("allocation.delta must be positive");
  if (!(down_fraction > 0.0)) throw DomainError("allocation.down_fraction must be positive");
  if (max_iterations < 1) throw DomainError("allocation.max_iterations must be at least 1");
  for (int i = 0; i < kRotorCount; ++i) {
    if (opposite[i] < 1 || opposite[i] > kRotorCount || opposite[i] == i + 1) {
      throw DomainError("allocation.opposite must map each rotor to a different rotor in 1..6");
    }
  }
}

Allocator::Allocator(AllocatorConfig config, VehicleParams params) : cfg_(config), params_(std::move(params)) {
  cfg_.validate();
}

AllocationProblem Allocator::problem(const ControlCommand& u_hat, FailureMode mode) const {
  const double f_up = params_.thrust_coeff * params_.max_rotor_speed * params_.max_rotor_speed;
  const std::optional<int> opp =
      mode.is_nominal() ? std::nullopt : std::optional<int>(cfg_.opposite[mode.index() - 1]);
  const ForceBounds bounds = build_failure_bounds(mode, cfg_.down_fraction * f_up, f_up, cfg_.delta, opp);
  AllocationProblem p;
  p.effectiveness = mixer_matrix(params_) * failure_matrix(mode);
  p.desired = u_hat.to_vector();
  p.weights = cfg_.weights;
  p.lambda = cfg_.lambda;
  p.lower = bounds.lower;
  p.upper = bounds.upper;
  return p;
}

RotorCommand Allocator::allocate(const ControlCommand& u_hat, FailureMode mode) {
  if (warm_mode_ != mode) warm_.reset();
  last_ = hexftc::allocate(problem(u_hat, mode), warm_, cfg_.max_iterations);
  warm_ = last_.forces;
  warm_mode_ = mode;
  return last_.forces / params_.thrust_coeff;
}

}  // namespace hexftc
