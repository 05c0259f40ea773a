#pragma once

#include <Eigen/Dense>
#include <utility>

#include "stck/autodiff.hpp"
#include "stck/dims.hpp"
#include "stck/tensor.hpp"

namespace stck::motion {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

// Constant-velocity state in output-grid units: (cx, cy, vx, vy), dt = 1 frame.
struct KalmanState {
  Eigen::Vector4d mean;
  Eigen::Matrix4d cov;
};

struct KalmanParams {
  Eigen::Matrix4d process_noise;      // Q
  Eigen::Matrix2d measurement_noise;  // Rm

  KalmanParams();
};

const KalmanParams& default_kalman_params();

// mean (cx, cy, 0, 0); cov diag(10, 10, 100, 100).
KalmanState kf_init(Vec2 center);

// x <- A x; P <- A P A^T + Q. Returns the new state and the predicted center.
std::pair<KalmanState, Vec2> kf_predict(const KalmanState& state,
                                        const KalmanParams& params = default_kalman_params());

// Joseph-form measurement update with H = [[1,0,0,0],[0,1,0,0]].
KalmanState kf_update(const KalmanState& state, Vec2 measured,
                      const KalmanParams& params = default_kalman_params());

// O[0][y][x] = x - m.x, O[1][y][x] = y - m.y. m may lie off-grid.
Tensor build_motion_map(Vec2 m, int height, int width);

// [O; F] channel concatenation -> [18,H,W]; motion channels first.
ad::Var make_motion_aware(const ad::Var& search_feature, const Tensor& motion_map);

}  // namespace stck::motion
