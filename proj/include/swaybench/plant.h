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

#ifndef SWAYBENCH_PLANT_H_
#define SWAYBENCH_PLANT_H_

// Sagittal-plane chain of 1 to 4 rigid segments (shank, thigh, pelvis,
// trunk) standing on a support surface that tilts about the ankle axis.
//
// Joint i connects segment i-1 (segment -1 is the foot, which moves with the
// support) to segment i. Joint angles are relative to the proximal segment;
// positive angles lean the distal segment forward. The tilt is a kinematic
// input: the ankle stays fixed in space, and the tilt only reaches the body
// through the ankle joint angle.

#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "swaybench/errors.h"

namespace swaybench {

inline constexpr int kMaxLinks = 4;

struct Segment {
  std::string name;
  double mass = 0.0;        // kg
  double com_height = 0.0;  // m, from the proximal joint along the segment
  double length = 0.0;      // m
  double inertia = 0.0;     // kg*m^2 about the segment COM
};

struct PlantParams {
  std::vector<Segment> segments;
  double gravity = 9.81;     // m/s^2; negative values hang the chain
  double fall_guard = 0.5;   // rad, |COM sway| limit
  double foot_length = 0.22;  // m, reporting only

  // Robot anthropometrics: 15.30 kg, COM 0.68 m above the ankle, 1.52 m
  // tall. The upper body (9.50 kg) is split into pelvis and trunk.
  // Lengths and the upper-body split are derived values, see README.
  static PlantParams Default();

  // Locks the distal joints: segments n-1.. are merged into one rigid body.
  PlantParams WithLinkCount(int n) const;

  int NumLinks() const { return static_cast<int>(segments.size()); }
  double TotalMass() const;
  // Whole-body COM height in upright stance.
  double UprightComHeight() const;
  double TotalHeight() const;
  // Inertia of the upright body about the ankle axis.
  double UprightInertiaAboutAnkle() const;

  void Validate() const;
};

// Thin-rod inertia about the centre, m L^2 / 12.
double ThinRodInertia(double mass, double length);

struct PlantState {
  std::vector<double> q;   // rad, joint angles
  std::vector<double> qd;  // rad/s
  double tilt = 0.0;       // rad, support surface
  double tilt_rate = 0.0;  // rad/s
  double time = 0.0;       // s

  static PlantState Upright(int num_links);
};

class FallError : public Error {
 public:
  FallError(double time, PlantState state, const std::string& what)
      : Error(what), time_(time), state_(std::move(state)) {}
  double time() const { return time_; }
  const PlantState& state() const { return state_; }

 private:
  double time_;
  PlantState state_;
};

// Absolute (space-referenced) segment angles from the vertical.
std::vector<double> SegmentAngles(const PlantState& state);
std::vector<double> SegmentRates(const PlantState& state);

// Advances the chain by dt (0 < dt <= 0.01 s) with constant joint torques
// using one classical Runge-Kutta step. The support tilt is set to
// `tilt_command` and its rate to the finite difference over the step.
// Throws FallError if |COM sway| >= fall_guard or any |q| >= pi/2.
PlantState Step(const PlantState& state, std::span<const double> torques,
                double tilt_command, double dt, const PlantParams& params);

// Space-referenced angle of the whole-body COM about the ankle joint.
double ComSway(const PlantState& state, const PlantParams& params);

// COM sway from absolute segment angles.
double ComSwayFromSegmentAngles(std::span<const double> phi,
                                const PlantParams& params);

// Kinetic plus potential energy (potential zero at the ankle height).
double MechanicalEnergy(const PlantState& state, const PlantParams& params);

struct SensorNoise {
  double joint_angle = 0.0;         // rad
  double joint_velocity = 0.0;      // rad/s
  double vestibular_angle = 0.0;    // rad
  double vestibular_velocity = 0.0;  // rad/s
  double torque = 0.0;              // N*m

  void Validate() const;
};

struct SensorReadout {
  std::vector<double> joint_angles;      // proprioception
  std::vector<double> joint_velocities;
  double head_angle = 0.0;     // vestibular, top segment in space
  double head_velocity = 0.0;
  double ankle_torque = 0.0;   // last applied
  std::vector<double> external_torques;  // contact torque per joint
  double time = 0.0;
};

// Ideal readout plus independent Gaussian noise on every channel, drawn
// from `rng` in a fixed channel order.
SensorReadout ReadSensors(const PlantState& state, const PlantParams& params,
                          std::span<const double> applied_torques,
                          const SensorNoise& noise, std::mt19937_64& rng);

void to_json(nlohmann::json& j, const Segment& s);
void from_json(const nlohmann::json& j, Segment& s);
void to_json(nlohmann::json& j, const PlantParams& p);
void from_json(const nlohmann::json& j, PlantParams& p);
void to_json(nlohmann::json& j, const SensorNoise& n);
void from_json(const nlohmann::json& j, SensorNoise& n);

}  // namespace swaybench

#endif  // SWAYBENCH_PLANT_H_
