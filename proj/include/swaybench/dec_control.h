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

#ifndef SWAYBENCH_DEC_CONTROL_H_
#define SWAYBENCH_DEC_CONTROL_H_

// Disturbance Estimation and Compensation (DEC) balance controller.
//
// One servo module per joint. Each module drives a delayed PD on the sum of
// the negated control error and the angle equivalents of the estimated
// disturbances (gravity, support translation, push), and adds an undelayed
// passive stiffness/damping on the joint angle:
//
//   T = G * PD(Kp, Kd)[-eps + a_grav + a_trans + a_push](t - delay)
//       + Kp_pass * q + Kd_pass * qdot
//
// T is a corrective torque: positive T opposes a positive deflection. The
// plant receives -T. The support tilt enters the ankle module's error
// through the foot-in-space estimate, which integrates the dead-banded
// support rotation velocity reconstructed from vestibular and joint
// velocity signals.

#include <array>
#include <deque>
#include <string>
#include <vector>

#include "json.hpp"
#include "swaybench/plant.h"

namespace swaybench {

enum class ControlledVariable {
  kComSway,     // space-referenced COM sway of the segments above the joint
  kJointAngle,  // the joint angle itself
};

struct JointGains {
  std::string name;
  double kp = 0.0;          // N*m/rad
  double kd = 0.0;          // N*m*s/rad
  double kp_passive = 0.0;  // N*m/rad
  double kd_passive = 0.0;  // N*m*s/rad
  double loop_gain = 1.0;   // G
  double ext_gain = 0.0;    // G_ext, 0 disables the push path
  double ext_cutoff = 5.0;  // rad/s
  double delay = 0.0;       // s
  double threshold = 0.0;   // rad/s, dead band of the tilt estimator
  ControlledVariable controlled = ControlledVariable::kJointAngle;
};

struct DecParams {
  std::vector<JointGains> joints;
  double tick_rate = 100.0;  // Hz

  // Sagittal gains (ankle, knee, hip, pelvis); loop gain 1.2 on the ankle
  // module, 10 ms delay.
  static DecParams Standard();

  int NumJoints() const { return static_cast<int>(joints.size()); }
  double TickPeriod() const { return 1.0 / tick_rate; }
  void Validate() const;
  // Keeps the first n joints (for plants with locked distal joints).
  DecParams Truncated(int n) const;
};

// Named test-protocol variants: "standard", "no-d" (ankle Kd = 0),
// "double-d" (ankle Kd x 2), "g-1.0", "g-0.8" (ankle loop gain).
const std::vector<std::string>& PresetNames();
DecParams Preset(const std::string& name);

// Angle equivalents of the disturbances and their rates. The rates feed
// the derivative branch of the servo PD.
struct DisturbanceEstimates {
  double grav = 0.0;   // rad
  double trans = 0.0;  // rad, no estimator: always 0 here
  double push = 0.0;   // rad
  double grav_rate = 0.0;   // rad/s
  double trans_rate = 0.0;
  double push_rate = 0.0;
  double foot_in_space = 0.0;  // rad, reconstructed support tilt
};

struct AngleAndRate {
  double angle = 0.0;  // rad
  double rate = 0.0;   // rad/s
};

// Dead band: x + theta below -theta, 0 inside, x - theta above theta.
double Deadband(double x, double theta);

// Pure delay of a fixed number of ticks, initialised with zeros.
class DelayLine {
 public:
  explicit DelayLine(int ticks = 0);
  // Pushes the current input and returns the input from `ticks` ago.
  double Push(double value);
  int ticks() const { return ticks_; }

 private:
  int ticks_;
  std::deque<double> buffer_;
};

// Reconstructs the support tilt by integrating the dead-banded
// foot-in-space velocity (trapezoid rule at the controller tick).
class FootInSpaceEstimator {
 public:
  // head_velocity - sum of joint velocities.
  static double FootInSpaceRate(const SensorReadout& readout);
  double Update(const SensorReadout& readout, double threshold, double dt);
  double estimate() const { return estimate_; }
  // Dead-banded rate used in the last update.
  double rate() const { return previous_rate_; }

 private:
  double estimate_ = 0.0;
  double previous_rate_ = 0.0;
};

// Second-order Butterworth low-pass, bilinear transform with prewarping.
class ButterworthLowPass {
 public:
  ButterworthLowPass() = default;
  ButterworthLowPass(double cutoff_rad_s, double sample_rate);
  double Filter(double x);
  // Output change over the last sample, times the sample rate.
  double Slope() const { return (y_[0] - y_[1]) * sample_rate_; }

 private:
  std::array<double, 3> b_{1.0, 0.0, 0.0};
  std::array<double, 2> a_{0.0, 0.0};
  std::array<double, 2> x_{0.0, 0.0};
  std::array<double, 2> y_{0.0, 0.0};
  double sample_rate_ = 1.0;
};

// Per-module servo memory.
struct ServoState {
  DelayLine delay;

  ServoState() = default;
  ServoState(const JointGains& gains, double tick_rate);
};

// Corrective torque of one module for one tick. The derivative branch of
// the PD uses the supplied rates (measured velocities propagated through
// the estimators) rather than differencing the sampled input.
double ServoTorque(const JointGains& gains, const AngleAndRate& error,
                   const DisturbanceEstimates& disturbances,
                   double joint_angle, double joint_velocity,
                   ServoState& state);

// Angle equivalent T_grav / Kp of the gravity torque on the segments from
// `joint` up, from space-referenced segment angles and rates.
AngleAndRate GravityAngleEquivalent(int joint, const std::vector<double>& phi,
                                    const std::vector<double>& phi_rate,
                                    const PlantParams& body, double kp);

// Space-referenced sway of the COM of segments `joint`.. about that joint.
AngleAndRate SwayAbove(int joint, const std::vector<double>& phi,
                       const std::vector<double>& phi_rate,
                       const PlantParams& body);

class DecController {
 public:
  // `body` is the controller's internal body model (used for COM and
  // gravity estimates); it must have as many segments as params has joints.
  DecController(DecParams params, PlantParams body);

  // One controller tick. Returns joint torques in plant convention.
  std::vector<double> Tick(const SensorReadout& readout);

  const DecParams& params() const { return params_; }
  double foot_in_space() const { return fs_.estimate(); }
  const std::vector<DisturbanceEstimates>& last_disturbances() const {
    return last_;
  }
  // Corrective torques (before the sign flip) from the last tick.
  const std::vector<double>& last_corrective() const { return corrective_; }

 private:
  DecParams params_;
  PlantParams body_;
  FootInSpaceEstimator fs_;
  std::vector<ServoState> servos_;
  std::vector<ButterworthLowPass> push_filters_;
  std::vector<DisturbanceEstimates> last_;
  std::vector<double> corrective_;
};

void to_json(nlohmann::json& j, const JointGains& g);
void from_json(const nlohmann::json& j, JointGains& g);
void to_json(nlohmann::json& j, const DecParams& p);
// Accepts {"preset": name, "joints": [...]} where listed joint fields
// override the preset (default "standard").
void from_json(const nlohmann::json& j, DecParams& p);

}  // namespace swaybench

#endif  // SWAYBENCH_DEC_CONTROL_H_
