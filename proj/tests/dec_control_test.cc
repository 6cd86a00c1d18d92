// Copyright 2026 The swaybench Authors
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

#include "swaybench/dec_control.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "swaybench/errors.h"

namespace swaybench {
namespace {

SensorReadout Readout(double q, double qd, double head, double head_rate) {
  SensorReadout r;
  r.joint_angles = {q};
  r.joint_velocities = {qd};
  r.head_angle = head;
  r.head_velocity = head_rate;
  r.external_torques = {0.0};
  return r;
}

TEST(DeadbandTest, ThreeBranches) {
  const double theta = 0.003;
  EXPECT_EQ(Deadband(0.5 * theta, theta), 0.0);
  EXPECT_EQ(Deadband(2 * theta, theta), theta);
  EXPECT_EQ(Deadband(-2 * theta, theta), -theta);
  EXPECT_EQ(Deadband(theta, theta), 0.0);
  EXPECT_EQ(Deadband(-theta, theta), 0.0);
  EXPECT_EQ(Deadband(0.7, 0.0), 0.7);
}

TEST(DeadbandTest, OddContinuousLipschitz) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> th(0.0, 0.5);
  for (int t = 0; t < 10000; ++t) {
    const double x = u(rng), y = u(rng), theta = th(rng);
    EXPECT_EQ(Deadband(-x, theta), -Deadband(x, theta));
    EXPECT_LE(std::abs(Deadband(x, theta) - Deadband(y, theta)),
              std::abs(x - y) + 1e-15);
  }
  for (double theta : {0.1, 0.25}) {
    for (double eps : {1e-9, 1e-12}) {
      EXPECT_NEAR(Deadband(theta + eps, theta), 0.0, 2 * eps);
      EXPECT_NEAR(Deadband(-theta - eps, theta), 0.0, 2 * eps);
    }
  }
}

TEST(FootInSpaceTest, ConstantVelocityAboveThreshold) {
  const double v = 0.02, theta = 0.005, dt = 0.01;
  FootInSpaceEstimator fs;
  const int ticks = 300;
  for (int k = 0; k < ticks; ++k) fs.Update(Readout(0, 0, 0, v), theta, dt);
  const double want = (v - theta) * ticks * dt;
  EXPECT_NEAR(fs.estimate(), want, (v - theta) * dt);
}

TEST(FootInSpaceTest, SlowDriftIsSuppressed) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.004, 0.004);
  FootInSpaceEstimator fs;
  for (int k = 0; k < 1000; ++k) {
    fs.Update(Readout(0.0, u(rng), 0.0, u(rng) * 0.2), 0.005, 0.01);
  }
  EXPECT_EQ(fs.estimate(), 0.0);
}

TEST(FootInSpaceTest, RampAndHoldMatchesTrapezoidOracle) {
  std::vector<double> rate;
  for (int k = 0; k < 600; ++k) {
    const double t = k * 0.01;
    rate.push_back(t < 1.0 ? 0.0 : (t < 3.0 ? 0.035 : (t < 3.5 ? -0.01 : 0.0)));
  }
  const double theta = 0.17 * std::numbers::pi / 180;
  const auto want = oracle::TrapezoidFootInSpace(rate, theta, 0.01);
  FootInSpaceEstimator fs;
  for (std::size_t k = 0; k < rate.size(); ++k) {
    // Support rotation seen as head velocity minus the ankle velocity.
    fs.Update(Readout(0.1, -0.002, 0.0, rate[k] - 0.002), theta, 0.01);
    ASSERT_NEAR(fs.estimate(), want[k], 1e-6) << k;
  }
}

TEST(ServoTest, ZeroInputsGiveZeroTorque) {
  JointGains g = DecParams::Standard().joints[0];
  ServoState state(g, 100.0);
  for (int k = 0; k < 20; ++k) {
    EXPECT_EQ(ServoTorque(g, {}, {}, 0.0, 0.0, state), 0.0);
  }
}

TEST(ServoTest, StaticSipCaseDoublesGravityTorque) {
  const double mgh = 15.3 * 9.81 * 0.68, alpha = 0.01;
  JointGains g;
  g.kp = mgh;
  g.loop_gain = 1.0;
  ServoState state(g, 100.0);
  DisturbanceEstimates d;
  d.grav = alpha;
  const double torque = ServoTorque(g, {-alpha, 0.0}, d, 0.0, 0.0, state);
  EXPECT_NEAR(torque, 2 * mgh * alpha, 1e-12);
}

TEST(ServoTest, FiftyMillisecondDelayHoldsFiveTicks) {
  JointGains g;
  g.kp = 100.0;
  g.delay = 0.05;
  ServoState state(g, 100.0);
  EXPECT_EQ(state.delay.ticks(), 5);
  for (int k = 0; k < 10; ++k) {
    const double out = ServoTorque(g, {-1.0, 0.0}, {}, 0.0, 0.0, state);
    if (k < 5) {
      EXPECT_EQ(out, 0.0) << k;
    } else {
      EXPECT_EQ(out, 100.0) << k;
    }
  }
}

TEST(ServoTest, DelayShiftsOutputByWholeTicks) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  std::vector<double> input(60);
  for (double& v : input) v = d(rng);
  for (int k = 0; k <= 6; ++k) {
    JointGains g;
    g.kp = 3.0;
    g.kd = 0.5;
    g.loop_gain = 1.1;
    g.delay = k / 100.0;
    JointGains g0 = g;
    g0.delay = 0.0;
    ServoState delayed(g, 100.0), direct(g0, 100.0);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < input.size(); ++i) {
      const AngleAndRate e{input[i], 0.5 * input[i]};
      a.push_back(ServoTorque(g, e, {}, 0.0, 0.0, delayed));
      b.push_back(ServoTorque(g0, e, {}, 0.0, 0.0, direct));
    }
    for (std::size_t i = 0; i < input.size(); ++i) {
      EXPECT_EQ(a[i], i < static_cast<std::size_t>(k) ? 0.0 : b[i - k]);
    }
  }
}

TEST(ServoTest, PassiveTermIsUndelayed) {
  JointGains g;
  g.kp_passive = 4.0;
  g.kd_passive = 2.0;
  g.delay = 0.05;
  ServoState state(g, 100.0);
  EXPECT_EQ(ServoTorque(g, {}, {}, 0.5, 0.25, state), 2.5);
}

TEST(ServoTest, ActivePathIsLinear) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d;
  JointGains g = DecParams::Standard().joints[0];
  g.kp_passive = g.kd_passive = 0.0;
  g.delay = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double lambda = 3.0 * d(rng);
    DisturbanceEstimates dist;
    dist.grav = d(rng);
    dist.push = d(rng);
    dist.grav_rate = d(rng);
    const AngleAndRate e{d(rng), d(rng)};
    DisturbanceEstimates scaled = dist;
    scaled.grav *= lambda;
    scaled.push *= lambda;
    scaled.grav_rate *= lambda;
    ServoState s1(g, 100.0), s2(g, 100.0);
    const double a = ServoTorque(g, e, dist, 0.0, 0.0, s1);
    const double b = ServoTorque(g, {lambda * e.angle, lambda * e.rate},
                                 scaled, 0.0, 0.0, s2);
    EXPECT_NEAR(b, lambda * a, 1e-9 * std::max(1.0, std::abs(b)));
  }
}

TEST(DelayLineTest, NegativeDelayIsRejected) {
  EXPECT_THROW(DelayLine(-1), ConfigError);
  DelayLine zero(0);
  EXPECT_EQ(zero.Push(3.5), 3.5);
}

TEST(ButterworthTest, UnityDcGainAndHalfPowerAtCutoff) {
  const double fs = 100.0, wc = 5.0;
  ButterworthLowPass dc(wc, fs);
  double y = 0.0;
  for (int k = 0; k < 2000; ++k) y = dc.Filter(1.0);
  EXPECT_NEAR(y, 1.0, 1e-12);

  ButterworthLowPass f(wc, fs);
  double peak = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double out = f.Filter(std::sin(wc * k / fs));
    if (k > 10000) peak = std::max(peak, std::abs(out));
  }
  EXPECT_NEAR(peak, 1.0 / std::sqrt(2.0), 1e-3);
}

TEST(PresetTest, StandardReproducesTableGains) {
  const DecParams p = DecParams::Standard();
  ASSERT_EQ(p.NumJoints(), 4);
  EXPECT_EQ(p.tick_rate, 100.0);
  const double kp[] = {119.57, 55.72, 22.71, 10.59};
  const double kd[] = {11.95, 0.4458, 5.67, 0.07};
  const double ext[] = {0.5, 0.5, 0.5, 0.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(p.joints[i].kp, kp[i]);
    EXPECT_EQ(p.joints[i].kd, kd[i]);
    EXPECT_EQ(p.joints[i].ext_gain, ext[i]);
    EXPECT_EQ(p.joints[i].ext_cutoff, 5.0);
  }
  EXPECT_EQ(p.joints[0].loop_gain, 1.2);
  EXPECT_EQ(p.joints[0].controlled, ControlledVariable::kComSway);
  EXPECT_NEAR(p.joints[0].threshold, 0.17 * std::numbers::pi / 180, 1e-15);
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(p.joints[i].controlled, ControlledVariable::kJointAngle);
  }
}

TEST(PresetTest, ProtocolVariants) {
  const auto names = PresetNames();
  EXPECT_EQ(names, (std::vector<std::string>{"standard", "no-d", "double-d",
                                             "g-1.0", "g-0.8"}));
  const DecParams s = Preset("standard");
  EXPECT_EQ(Preset("no-d").joints[0].kd, 0.0);
  EXPECT_EQ(Preset("double-d").joints[0].kd, 2 * s.joints[0].kd);
  EXPECT_EQ(Preset("g-1.0").joints[0].loop_gain, 1.0);
  EXPECT_EQ(Preset("g-0.8").joints[0].loop_gain, 0.8);
  for (const auto& n : names) {
    for (int i = 1; i < 4; ++i) {
      EXPECT_EQ(Preset(n).joints[i].kd, s.joints[i].kd);
    }
  }
  EXPECT_THROW(Preset("triple-d"), ConfigError);
}

TEST(DecParamsTest, JsonOverridesPreset) {
  const auto j = nlohmann::json::parse(R"({
    "preset": "g-0.8",
    "joints": [{"delay_s": 0.03, "controlled_variable": "joint_angle"}]
  })");
  const DecParams p = j.get<DecParams>();
  EXPECT_EQ(p.NumJoints(), 1);
  EXPECT_EQ(p.joints[0].delay, 0.03);
  EXPECT_EQ(p.joints[0].loop_gain, 0.8);
  EXPECT_EQ(p.joints[0].controlled, ControlledVariable::kJointAngle);
  const DecParams back = nlohmann::json(DecParams::Standard()).get<DecParams>();
  EXPECT_EQ(back.joints[2].kd_passive, DecParams::Standard().joints[2].kd_passive);
  EXPECT_THROW(
      nlohmann::json::parse(R"({"joints":[{"kp": -1}]})").get<DecParams>(),
      ConfigError);
}

TEST(ControllerTest, AtRestGivesZeroTorque) {
  DecController c(DecParams::Standard(), PlantParams::Default());
  std::mt19937_64 rng(0);
  const PlantParams p = PlantParams::Default();
  const std::vector<double> tau(4, 0.0);
  for (int k = 0; k < 10; ++k) {
    const auto out = c.Tick(
        ReadSensors(PlantState::Upright(4), p, tau, SensorNoise{}, rng));
    for (double t : out) EXPECT_EQ(t, 0.0);
  }
}

TEST(ControllerTest, ZeroGainsAnnihilateTorque) {
  DecParams params = DecParams::Standard();
  for (auto& g : params.joints) {
    g.loop_gain = 0.0;
    g.kp_passive = g.kd_passive = 0.0;
  }
  DecController c(params, PlantParams::Default());
  std::mt19937_64 rng(6);
  std::normal_distribution<double> d(0.0, 0.1);
  for (int k = 0; k < 200; ++k) {
    SensorReadout r;
    for (int i = 0; i < 4; ++i) {
      r.joint_angles.push_back(d(rng));
      r.joint_velocities.push_back(d(rng));
      r.external_torques.push_back(d(rng));
    }
    r.head_angle = d(rng);
    r.head_velocity = d(rng);
    for (double t : c.Tick(r)) EXPECT_EQ(t, 0.0);
  }
}

TEST(ControllerTest, SipTiltStepMatchesScalarOracle) {
  const PlantParams body = PlantParams::Default().WithLinkCount(1);
  DecParams params = DecParams::Standard().Truncated(1);
  JointGains& g = params.joints[0];
  g.threshold = 0.0;
  DecController c(params, body);
  const double mgh = body.TotalMass() * body.gravity * body.UprightComHeight();
  oracle::SipDec o(g.kp, g.kd, g.kp_passive, g.kd_passive, g.loop_gain,
                   static_cast<int>(std::lround(g.delay * 100)), 0.0, 0.01, mgh);
  PlantState s = PlantState::Upright(1);
  std::mt19937_64 rng(0);
  std::vector<double> tau = {0.0};
  for (int tick = 0; tick < 100; ++tick) {
    const SensorReadout r = ReadSensors(s, body, tau, SensorNoise{}, rng);
    tau = c.Tick(r);
    const double want =
        o.Tick(r.joint_angles[0], r.joint_velocities[0], r.head_angle,
               r.head_velocity);
    ASSERT_NEAR(tau[0], want, 1e-6) << "tick " << tick;
    for (int k = 0; k < 10; ++k) s = Step(s, tau, 0.01, 1e-3, body);
  }
}

TEST(ControllerTest, RandomSipTicksMatchScalarOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  const PlantParams body = PlantParams::Default().WithLinkCount(1);
  const double mgh = body.TotalMass() * body.gravity * body.UprightComHeight();
  for (int t = 0; t < 100; ++t) {
    DecParams params = DecParams::Standard().Truncated(1);
    JointGains& g = params.joints[0];
    g.kp = 50 + 250 * u(rng);
    g.kd = 30 * u(rng);
    g.kp_passive = 50 * u(rng);
    g.kd_passive = 20 * u(rng);
    g.loop_gain = 0.5 + u(rng);
    g.delay = std::floor(7 * u(rng)) / 100.0;
    g.threshold = 0.01 * u(rng);
    g.ext_gain = 0.0;
    DecController c(params, body);
    oracle::SipDec o(g.kp, g.kd, g.kp_passive, g.kd_passive, g.loop_gain,
                     static_cast<int>(std::lround(g.delay * 100)),
                     g.threshold, 0.01, mgh);
    for (int k = 0; k < 50; ++k) {
      const SensorReadout r =
          Readout(0.1 * s(rng), 0.5 * s(rng), 0.1 * s(rng), 0.5 * s(rng));
      const double got = c.Tick(r)[0];
      const double want = o.Tick(r.joint_angles[0], r.joint_velocities[0],
                                 r.head_angle, r.head_velocity);
      ASSERT_NEAR(got, want, 1e-9 * std::max(1.0, std::abs(want)))
          << "case " << t << " tick " << k;
    }
  }
}

TEST(ControllerTest, PushPathFiltersExternalTorque) {
  const PlantParams body = PlantParams::Default().WithLinkCount(1);
  DecParams params = DecParams::Standard().Truncated(1);
  params.joints[0].delay = 0.0;
  DecController c(params, body);
  SensorReadout r = Readout(0, 0, 0, 0);
  r.external_torques = {2.0};
  for (int k = 0; k < 500; ++k) c.Tick(r);
  const auto& d = c.last_disturbances()[0];
  EXPECT_NEAR(d.push, 0.5 * 2.0 / params.joints[0].kp, 1e-9);
  EXPECT_NEAR(d.push_rate, 0.0, 1e-6);
}

TEST(ControllerTest, ModuleCountMustMatchBody) {
  EXPECT_THROW(DecController(DecParams::Standard(),
                             PlantParams::Default().WithLinkCount(2)),
               DimensionError);
}

}  // namespace
}  // namespace swaybench
