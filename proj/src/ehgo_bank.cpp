#include "hexftc/ehgo_bank.hpp"

#include "hexftc/vehicle_model.hpp"

#include <algorithm>
#include <cmath>

namespace hexftc {

bool is_hurwitz_cubic(const Vec3& alpha) {
  return alpha(0) > 0.0 && alpha(2) > 0.0 && alpha(0) * alpha(1) > alpha(2);
}

void ObserverGains::validate() const {
  if (!alpha.allFinite() || !is_hurwitz_cubic(alpha)) {
    throw NotHurwitzError("observer.alpha does not give a Hurwitz cubic");
  }
  if (!std::isfinite(epsilon) || epsilon <= 0.0) throw DomainError("observer.epsilon must be positive");
  const double et = translational_epsilon();
  if (!std::isfinite(et) || et <= 0.0) throw DomainError("observer.epsilon_translational must be positive");
}

Eigen::Matrix<double, 9, 3> make_gain_vector(const ObserverGains& gains) {
  gains.validate();
  const double e = gains.epsilon;
  Eigen::Matrix<double, 9, 3> h;
  h << gains.alpha(0) / e * Mat3::Identity(),
       gains.alpha(1) / (e * e) * Mat3::Identity(),
       gains.alpha(2) / (e * e * e) * Mat3::Identity();
  return h;
}

Vec18 ExtendedEstimate::to_vector() const {
  Vec18 x;
  x << position_error, velocity_error, trans_disturbance, attitude_error, rate_error, rot_disturbance;
  return x;
}

ExtendedEstimate ExtendedEstimate::from_vector(const Vec18& x) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9), x.segment<3>(12), x.segment<3>(15)};
}

Vec6 ExtendedEstimate::rotational_error() const {
  Vec6 xi;
  xi << attitude_error, rate_error;
  return xi;
}

Vec18 EstimateBounds::to_vector() const {
  Vec18 b;
  b << Vec3::Constant(position), Vec3::Constant(velocity), Vec3::Constant(trans_disturbance),
       Vec3::Constant(attitude), Vec3::Constant(rate), Vec3::Constant(rot_disturbance);
  return b;
}

void EstimateBounds::validate() const {
  if (!(to_vector().array() > 0.0).all()) throw DomainError("observer.bounds must all be positive");
}

namespace {

/// Everything in the observer right-hand side that is constant over one sample interval.
class ObserverModel {
 public:
  ObserverModel(FailureMode mode, const Measurement& meas, const RotorCommand& omega_s,
                const ObserverReferences& refs, const ObserverGains& gains, const VehicleParams& params)
      : kin_(meas.euler, params.inertia), meas_(meas), ref_rate_(refs.attitude_rate) {
    const Vec6 masked = failure_matrix(mode).diagonal().cwiseProduct(omega_s);
    const Vec4 u = params.thrust_coeff * mixer_matrix(params) * masked;
    trans_input_ = params.gravity * Vec3::UnitZ() - refs.acceleration -
                   (u(0) / params.mass) * rotation_third_column(meas.euler);
    rot_input_ = kin_.gain * u.tail<3>();
    const double e = gains.epsilon, et = gains.translational_epsilon();
    h1_ = gains.alpha(0) / e;
    h2_ = gains.alpha(1) / (e * e);
    h3_ = gains.alpha(2) / (e * e * e);
    g1_ = gains.alpha(0) / et;
    g2_ = gains.alpha(1) / (et * et);
    g3_ = gains.alpha(2) / (et * et * et);
  }

  /// Measurement at fraction s of the interval, interpolated from the previous sample.
  void set_previous(const Measurement& prev) {
    dp_ = meas_.position_error - prev.position_error;
    da_ = meas_.attitude_error - prev.attitude_error;
  }

  Vec18 operator()(const Vec18& x, double s = 1.0) const {
    Vec18 dx;
    const double back = 1.0 - s;
    const Vec3 innov_p = meas_.position_error - back * dp_ - x.segment<3>(0);
    dx.segment<3>(0) = x.segment<3>(3) + g1_ * innov_p;
    dx.segment<3>(3) = x.segment<3>(6) + trans_input_ + g2_ * innov_p;
    dx.segment<3>(6) = g3_ * innov_p;

    const Vec3 innov_a = meas_.attitude_error - back * da_ - x.segment<3>(9);
    const Vec3 rate_error = x.segment<3>(12);
    // The reference is held over the interval and re-based at the sample instants, so the
    // attitude error drifts with the filtered reference rate in between.
    dx.segment<3>(9) = rate_error + ref_rate_ + h1_ * innov_a;
    dx.segment<3>(12) = x.segment<3>(15) + kin_.drift(rate_error + ref_rate_) + rot_input_ + h2_ * innov_a;
    dx.segment<3>(15) = h3_ * innov_a;
    return dx;
  }

 private:
  RotationalKinematics kin_;
  Measurement meas_;
  Vec3 ref_rate_;
  Vec3 trans_input_;
  Vec3 rot_input_;
  Vec3 dp_ = Vec3::Zero();
  Vec3 da_ = Vec3::Zero();
  double h1_ = 0.0, h2_ = 0.0, h3_ = 0.0;  // attitude channel
  double g1_ = 0.0, g2_ = 0.0, g3_ = 0.0;  // position channel
};

Vec18 clamp(const Vec18& x, const Vec18& limit) { return x.cwiseMax(-limit).cwiseMin(limit); }

}  // namespace

Vec18 observer_derivative(const ExtendedEstimate& est, FailureMode mode, const Measurement& meas,
                          const RotorCommand& omega_s, const ObserverReferences& refs,
                          const ObserverGains& gains, const VehicleParams& params) {
  return ObserverModel(mode, meas, omega_s, refs, gains, params)(est.to_vector());
}

ExtendedEstimate saturate_estimates(const ExtendedEstimate& est, const EstimateBounds& bounds) {
  return ExtendedEstimate::from_vector(clamp(est.to_vector(), bounds.to_vector()));
}

int observer_substeps(double dt, double epsilon) {
  if (!(dt > 0.0)) throw DomainError("sample interval must be positive");
  return std::max(1, static_cast<int>(std::ceil(10.0 * dt / epsilon - 1e-9)));
}

EstimateBank step_bank(const EstimateBank& bank, const Measurement& previous, const Measurement& meas,
                       const RotorCommand& omega_s, const ObserverReferences& refs, double dt,
                       const ObserverGains& gains, const EstimateBounds& bounds, const VehicleParams& params) {
  const int n = observer_substeps(dt, std::min(gains.epsilon, gains.translational_epsilon()));
  const double h = dt / n;
  const Vec18 limit = bounds.to_vector();
  EstimateBank next;
  for (int i = 0; i < kModelCount; ++i) {
    ObserverModel rhs(FailureMode(i), meas, omega_s, refs, gains, params);
    rhs.set_previous(previous);
    Vec18 x = bank[i].to_vector();
    for (int k = 0; k < n; ++k) {
      const double s0 = static_cast<double>(k) / n, s1 = static_cast<double>(k + 1) / n, sm = 0.5 * (s0 + s1);
      const Vec18 k1 = rhs(x, s0);
      const Vec18 k2 = rhs(x + 0.5 * h * k1, sm);
      const Vec18 k3 = rhs(x + 0.5 * h * k2, sm);
      const Vec18 k4 = rhs(x + h * k3, s1);
      x = clamp(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), limit);
    }
    next[i] = ExtendedEstimate::from_vector(x);
  }
  return next;
}

EhgoBank::EhgoBank(ObserverGains gains, EstimateBounds bounds, VehicleParams params)
    : gains_(std::move(gains)), bounds_(bounds), params_(std::move(params)) {
  gains_.validate();
  bounds_.validate();
  derivatives_.fill(Vec18::Zero());
}

void EhgoBank::initialize(const Measurement& meas) {
  ExtendedEstimate init;
  init.position_error = meas.position_error;
  init.attitude_error = meas.attitude_error;
  bank_.fill(saturate_estimates(init, bounds_));
  last_ = meas;
  refresh_derivatives(meas, RotorCommand::Zero(), ObserverReferences{});
}

void EhgoBank::step(const Measurement& meas, const RotorCommand& omega_s, const ObserverReferences& refs,
                    double dt) {
  // The previous attitude sample is re-expressed against the reference held over this interval.
  Measurement prev = last_;
  prev.attitude_error = last_.euler + (meas.attitude_error - meas.euler);
  bank_ = step_bank(bank_, prev, meas, omega_s, refs, dt, gains_, bounds_, params_);
  last_ = meas;
  refresh_derivatives(meas, omega_s, refs);
}

void EhgoBank::shift_reference(const Vec3& d_attitude, const Vec3& d_rate) {
  for (auto& e : bank_) {
    e.attitude_error -= d_attitude;
    e.rate_error -= d_rate;
    e = saturate_estimates(e, bounds_);
  }
}

void EhgoBank::refresh_derivatives(const Measurement& meas, const RotorCommand& omega_s,
                                   const ObserverReferences& refs) {
  for (int i = 0; i < kModelCount; ++i) {
    derivatives_[i] = observer_derivative(bank_[i], FailureMode(i), meas, omega_s, refs, gains_, params_);
    derivatives_[i].segment<3>(9) -= refs.attitude_rate;
  }
}

}  // namespace hexftc
