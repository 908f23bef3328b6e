// Copyright (c) 2026 The usbl_homing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "homing/factors.hpp"
#include "test_util.hpp"

namespace homing {
namespace {

using testing::numerical_jacobian;
using testing::relative_error;
using testing::Rng;
constexpr double kPi = std::numbers::pi;

ChaserState at(const Vec3& p, double yaw = 0.0) {
  return {Pose3::FromYawPitchRoll(yaw, 0.0, 0.0, p), Vec3::Zero()};
}

TEST(UsblToBody, IdentityNegates) {
  EXPECT_TRUE(usbl_to_body(Pose3::Identity(), Vec3(1, 2, 3)).isApprox(Vec3(-1, -2, -3)));
}

TEST(UsblToBody, QuarterTurn) {
  const Pose3 q = Pose3::FromYawPitchRoll(kPi / 2, 0, 0, Vec3(100, -4, 7));
  const Vec3 v = usbl_to_body(q, Vec3(0, -5, 0));
  const Vec3 oracle = q.rotation().transpose() * Vec3(0, 5, 0);
  EXPECT_LE((v - Vec3(5, 0, 0)).norm(), 1e-12);
  EXPECT_LE((v - oracle).norm(), 1e-15);
}

TEST(UsblToBody, PreservesNorm) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 fix = rng.vec3(-500, 500);
    EXPECT_NEAR(usbl_to_body(rng.pose(), fix).norm(), fix.norm(), 1e-9);
  }
}

TEST(DvlToWorld, Examples) {
  EXPECT_TRUE(dvl_to_world(Mat3::Identity(), Vec3(1, 0, 0)).isApprox(Vec3(1, 0, 0)));
  EXPECT_LE((dvl_to_world(rotation_from_ypr(kPi / 2, 0, 0), Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm(), 1e-15);
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 v = rng.vec3(-3, 3);
    EXPECT_NEAR(dvl_to_world(rng.rotation(), v).norm(), v.norm(), 1e-12);
  }
}

TEST(PredictRangeBearing, Examples) {
  auto rb = predict_range_bearing(at(Vec3::Zero()), {Vec3(3, 4, 0)});
  EXPECT_NEAR(rb.range, 5.0, 1e-15);
  EXPECT_LE((rb.bearing.direction() - Vec3(0.6, 0.8, 0)).norm(), 1e-15);

  rb = predict_range_bearing(at(Vec3::Zero(), kPi / 2), {Vec3(0, 5, 0)});
  EXPECT_NEAR(rb.range, 5.0, 1e-15);
  EXPECT_LE((rb.bearing.direction() - Vec3(1, 0, 0)).norm(), 1e-15);

  for (double r : {0.5, 3.0, 250.0}) {
    rb = predict_range_bearing(at(Vec3(1, 1, -10)), {Vec3(1, 1, -10 + r)});
    EXPECT_NEAR(rb.range, r, 1e-12);
    EXPECT_LE((rb.bearing.direction() - Vec3(0, 0, 1)).norm(), 1e-15);
  }
}

TEST(PredictRangeBearing, CoincidentThrows) {
  EXPECT_THROW(predict_range_bearing(at(Vec3(1, 2, 3)), {Vec3(1, 2, 3)}), std::domain_error);
}

TEST(RangeBearingResidual, ZeroAtPrediction) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const ChaserState c = rng.chaser();
    const TargetPosition t{rng.vec3(-400, 400)};
    const RangeBearing rb = predict_range_bearing(c, t);
    const auto r = range_bearing_residual(c, t, {rb.range, rb.bearing, 0.0});
    EXPECT_LE(r.error.norm(), 1e-12);
  }
}

// Residual order is (bearing, bearing, range): a pure 1 m range error lands in the last slot.
TEST(RangeBearingResidual, PureRangeError) {
  const auto r = range_bearing_residual(at(Vec3::Zero()), {Vec3(10, 0, 0)},
                                        {9.0, UnitBearing(Vec3::UnitX()), 0.0});
  EXPECT_LE((r.error - Vec3(0, 0, 1)).norm(), 1e-15);
}

TEST(RangeBearingResidual, CoincidentThrows) {
  EXPECT_THROW(range_bearing_residual(at(Vec3::Zero()), {Vec3::Zero()}, {1.0, UnitBearing(Vec3::UnitX()), 0.0}),
               std::domain_error);
}

TEST(RangeBearingResidual, JacobiansMatchFiniteDifferences) {
  Rng rng(24);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ChaserState c = rng.chaser(100.0);
    const TargetPosition t{rng.vec3(-100, 100)};
    const RangeBearingMeas z{rng.uniform(1, 400), rng.bearing(), 0.0};
    const auto r = range_bearing_residual(c, t, z);
    const Eigen::MatrixXd Jc = numerical_jacobian<ChaserState>(
        [&](const ChaserState& x) -> Eigen::VectorXd { return range_bearing_residual(x, t, z).error; },
        testing::retract_chaser, c, 9);
    const Eigen::MatrixXd Jt = numerical_jacobian<Vec3>(
        [&](const Vec3& x) -> Eigen::VectorXd { return range_bearing_residual(c, {x}, z).error; },
        testing::retract_vec3, t.position, 3);
    worst = std::max({worst, relative_error(r.d_chaser, Jc), relative_error(r.d_target, Jt)});
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(RangeBearingResidual, InvariantUnderRigidTransform) {
  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const ChaserState c = rng.chaser(100.0);
    const TargetPosition t{rng.vec3(-100, 100)};
    const RangeBearingMeas z{rng.uniform(1, 300), rng.bearing(), 0.0};
    const Pose3 g = rng.pose(1000.0);
    ChaserState c2 = c;
    c2.pose = g * c.pose;
    const TargetPosition t2{g.transform_from(t.position)};
    EXPECT_LE((range_bearing_residual(c, t, z).error - range_bearing_residual(c2, t2, z).error).norm(), 1e-9);
  }
}

TEST(UsblNoiseModel, Examples) {
  Eigen::MatrixXd S = usbl_noise_model(1.0).covariance();
  EXPECT_NEAR(std::sqrt(S(0, 0)), 0.0175, 1e-15);
  EXPECT_NEAR(std::sqrt(S(1, 1)), 0.0175, 1e-15);
  EXPECT_NEAR(std::sqrt(S(2, 2)), 0.1, 1e-15);
  S = usbl_noise_model(100.0).covariance();
  EXPECT_NEAR(std::sqrt(S(0, 0)), 1.75, 1e-12);
  S = usbl_noise_model(10.0).covariance();
  EXPECT_NEAR(S(0, 0), 0.175 * 0.175, 1e-15);
  EXPECT_NEAR(S(1, 1), 0.175 * 0.175, 1e-15);
  EXPECT_NEAR(S(2, 2), 0.01, 1e-15);
  EXPECT_EQ(S(0, 1), 0.0);
}

TEST(UsblNoiseModel, RejectsNonPositiveRange) {
  EXPECT_THROW(usbl_noise_model(0.0), std::invalid_argument);
  EXPECT_THROW(usbl_noise_model(-3.0), std::invalid_argument);
}

TEST(UsblNoiseModel, PositiveDefinite) {
  for (double r : {1e-6, 0.1, 1.0, 60.0, 1000.0, 1e5}) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(usbl_noise_model(r).covariance());
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << r;
  }
}

TEST(MotionModel, PredictExamples) {
  EXPECT_TRUE(motion_model_predict(Vec3(0, 0, -10), {2.0, Heading(0.0)}, 1.0).isApprox(Vec3(2, 0, -10)));
  EXPECT_LE((motion_model_predict(Vec3(1, 1, -5), {1.0, Heading(kPi / 2)}, 2.0) - Vec3(1, 3, -5)).norm(), 1e-15);
  EXPECT_LE((motion_model_predict(Vec3(0, 0, 0), {std::sqrt(2.0), Heading(kPi / 4)}, 1.0) - Vec3(1, 1, 0)).norm(),
            1e-15);
}

TEST(MotionModel, ResidualZeroAtPrediction) {
  const TargetMotionParams p{1.3, Heading(0.7)};
  const TargetPosition a{Vec3(4, -2, -8)};
  const auto r = motion_model_residual(a, motion_model_predict(a, p, 2.5), p, 2.5);
  EXPECT_LE(r.error.norm(), 1e-15);
}

TEST(MotionModel, ClosedFormJacobians) {
  const auto r = motion_model_residual({Vec3::Zero()}, {Vec3::Zero()}, {1.0, Heading(0.0)}, 1.0);
  EXPECT_EQ(r.d_speed, Vec3(1, 0, 0));
  EXPECT_EQ(r.d_heading, Vec3(0, 1, 0));
  EXPECT_EQ(r.d_from, Mat3::Identity());
  EXPECT_EQ(r.d_to, -Mat3::Identity());
}

TEST(MotionModel, JacobiansMatchFiniteDifferences) {
  Rng rng(26);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const TargetPosition a{rng.vec3(-500, 500)}, b{rng.vec3(-500, 500)};
    const TargetMotionParams p{rng.uniform(0, 3), Heading(rng.uniform(-kPi, kPi))};
    const double dt = rng.uniform(0.1, 3);
    const auto r = motion_model_residual(a, b, p, dt);
    // Affine in positions and speed, so large steps are exact there; heading balances
    // truncation against roundoff at h = 1e-4.
    const auto err = [&](const TargetPosition& x, const TargetPosition& y, const TargetMotionParams& q) {
      return Eigen::VectorXd(motion_model_residual(x, y, q, dt).error);
    };
    const auto Ja = numerical_jacobian<Vec3>([&](const Vec3& x) { return err({x}, b, p); },
                                             testing::retract_vec3, a.position, 3, 1e-2);
    const auto Jb = numerical_jacobian<Vec3>([&](const Vec3& x) { return err(a, {x}, p); },
                                             testing::retract_vec3, b.position, 3, 1e-2);
    const auto Jv = numerical_jacobian<double>(
        [&](const double& v) { return err(a, b, {v, p.heading}); },
        [](const double& v, const Eigen::VectorXd& d) { return v + d(0); }, p.speed, 1, 1e-2);
    const auto Jh = numerical_jacobian<Heading>(
        [&](const Heading& h) { return err(a, b, {p.speed, h}); },
        [](const Heading& h, const Eigen::VectorXd& d) { return h.retract(d(0)); }, p.heading, 1, 1e-4);
    worst = std::max({worst, relative_error(r.d_from, Ja), relative_error(r.d_to, Jb),
                      relative_error(r.d_speed, Jv), relative_error(r.d_heading, Jh, 1e-3)});
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(MotionModel, RejectsNonPositiveDt) {
  EXPECT_THROW(motion_model_residual({}, {}, {1.0, Heading(0.0)}, 0.0), std::invalid_argument);
}

TEST(Depth, LevelPoseJacobian) {
  const auto r = depth_residual(at(Vec3(5, 5, -20)), -19.5);
  EXPECT_NEAR(r.error, -0.5, 1e-15);
  Mat19 expected = Mat19::Zero();
  expected(5) = 1.0;
  EXPECT_EQ(r.d_chaser, expected);
}

TEST(Depth, PitchedPoseJacobian) {
  ChaserState c;
  c.pose = Pose3::FromYawPitchRoll(0.3, kPi / 2, 0.0, Vec3(0, 0, -3));
  const auto r = depth_residual(c, -3.0);
  EXPECT_NEAR(r.error, 0.0, 1e-15);
  EXPECT_NEAR(r.d_chaser(3), -1.0, 1e-12);
  EXPECT_NEAR(r.d_chaser(4), 0.0, 1e-12);
  EXPECT_NEAR(r.d_chaser(5), 0.0, 1e-12);
  EXPECT_EQ(r.d_chaser.head<3>(), Vec3::Zero().transpose());
  EXPECT_EQ(r.d_chaser.tail<3>(), Vec3::Zero().transpose());
}

TEST(Depth, JacobianMatchesFiniteDifferences) {
  Rng rng(27);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ChaserState c = rng.chaser(100.0);
    const double z = rng.uniform(-100, 0);
    const auto J = numerical_jacobian<ChaserState>(
        [&](const ChaserState& x) { return Eigen::VectorXd::Constant(1, depth_residual(x, z).error); },
        testing::retract_chaser, c, 9);
    worst = std::max(worst, relative_error(depth_residual(c, z).d_chaser, J));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Velocity, ResidualAndJacobian) {
  ChaserState c = at(Vec3::Zero());
  c.velocity = Vec3(1, 2, 3);
  EXPECT_EQ(velocity_residual(c, Vec3(1, 2, 3)).error, Vec3::Zero());
  const auto r = velocity_residual(c, Vec3::Zero());
  EXPECT_EQ(r.error, Vec3(1, 2, 3));
  Mat39 expected = Mat39::Zero();
  expected.rightCols<3>() = Mat3::Identity();
  EXPECT_EQ(r.d_chaser, expected);
}

TEST(ChaserRetract, LocalCoordinatesRoundTrip) {
  Rng rng(28);
  for (int trial = 0; trial < 100; ++trial) {
    const ChaserState a = rng.chaser();
    Vec9 d;
    d << rng.vec3(-1, 1), rng.vec3(-5, 5), rng.vec3(-1, 1);
    EXPECT_LE((chaser_local_coordinates(a, chaser_retract(a, d)) - d).norm(), 1e-9);
  }
}

}  // namespace
}  // namespace homing
