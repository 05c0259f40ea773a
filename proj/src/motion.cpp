#include "stck/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace stck::motion {

namespace {

Eigen::Matrix4d transition() {
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  return a;
}

Eigen::Matrix<double, 2, 4> observation() {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

void check_finite(const KalmanState& s, const char* what) {
  if (!s.mean.allFinite() || !s.cov.allFinite())
    throw std::runtime_error(std::string(what) + ": non-finite Kalman state");
}

}  // namespace

KalmanParams::KalmanParams() {
  process_noise = Eigen::Vector4d(1.0, 1.0, 0.25, 0.25).asDiagonal();
  measurement_noise = Eigen::Vector2d(1.0, 1.0).asDiagonal();
}

const KalmanParams& default_kalman_params() {
  static const KalmanParams p;
  return p;
}

KalmanState kf_init(Vec2 center) {
  if (!std::isfinite(center.x) || !std::isfinite(center.y))
    throw std::invalid_argument("kf_init: non-finite center");
  KalmanState s;
  s.mean << center.x, center.y, 0.0, 0.0;
  s.cov = Eigen::Vector4d(10.0, 10.0, 100.0, 100.0).asDiagonal();
  return s;
}

std::pair<KalmanState, Vec2> kf_predict(const KalmanState& state, const KalmanParams& params) {
  check_finite(state, "kf_predict");
  const Eigen::Matrix4d a = transition();
  KalmanState next;
  next.mean = a * state.mean;
  next.cov = a * state.cov * a.transpose() + params.process_noise;
  next.cov = 0.5 * (next.cov + next.cov.transpose());
  return {next, Vec2{next.mean(0), next.mean(1)}};
}

KalmanState kf_update(const KalmanState& state, Vec2 measured, const KalmanParams& params) {
  check_finite(state, "kf_update");
  if (!std::isfinite(measured.x) || !std::isfinite(measured.y))
    throw std::invalid_argument("kf_update: non-finite measurement");

  const Eigen::Matrix<double, 2, 4> h = observation();
  const Eigen::Vector2d innovation = Eigen::Vector2d(measured.x, measured.y) - h * state.mean;
  const Eigen::Matrix2d s_cov = h * state.cov * h.transpose() + params.measurement_noise;
  if (std::abs(s_cov.determinant()) < 1e-300)
    throw std::runtime_error("kf_update: singular innovation covariance");
  const Eigen::Matrix<double, 4, 2> gain = state.cov * h.transpose() * s_cov.inverse();

  KalmanState next;
  next.mean = state.mean + gain * innovation;
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;
  next.cov = ikh * state.cov * ikh.transpose() +
             gain * params.measurement_noise * gain.transpose();
  next.cov = 0.5 * (next.cov + next.cov.transpose());
  return next;
}

Tensor build_motion_map(Vec2 m, int height, int width) {
  if (!std::isfinite(m.x) || !std::isfinite(m.y))
    throw std::invalid_argument("build_motion_map: non-finite center");
  Tensor o({2, height, width});
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      o.at(0, y, x) = static_cast<double>(x) - m.x;
      o.at(1, y, x) = static_cast<double>(y) - m.y;
    }
  }
  return o;
}

ad::Var make_motion_aware(const ad::Var& search_feature, const Tensor& motion_map) {
  const Tensor& f = search_feature->value;
  if (f.ndim() != 3 || f.dim(0) != kSearchChannels)
    throw std::invalid_argument("make_motion_aware: search feature must be [16,H,W], got " +
                                shape_str(f.shape));
  if (motion_map.shape != Shape{2, f.dim(1), f.dim(2)})
    throw std::invalid_argument("make_motion_aware: motion map " + shape_str(motion_map.shape) +
                                " does not match feature " + shape_str(f.shape));
  return ad::concat_channels(ad::constant(motion_map), search_feature);
}

}  // namespace stck::motion
