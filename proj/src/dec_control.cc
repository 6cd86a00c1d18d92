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
#include <stdexcept>

namespace swaybench {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

AngleAndRate SwayAbove(int joint, const std::vector<double>& phi,
                       const std::vector<double>& phi_rate,
                       const PlantParams& body) {
  // First moments of the mass above the joint and their time derivatives.
  double x = 0.0, y = 0.0, dx = 0.0, dy = 0.0;
  double base_x = 0.0, base_y = 0.0, dbase_x = 0.0, dbase_y = 0.0;
  for (std::size_t k = joint; k < phi.size(); ++k) {
    const Segment& s = body.segments[k];
    const double sn = std::sin(phi[k]);
    const double cs = std::cos(phi[k]);
    const double w = phi_rate[k];
    x += s.mass * (base_x + s.com_height * sn);
    y += s.mass * (base_y + s.com_height * cs);
    dx += s.mass * (dbase_x + s.com_height * cs * w);
    dy += s.mass * (dbase_y - s.com_height * sn * w);
    base_x += s.length * sn;
    base_y += s.length * cs;
    dbase_x += s.length * cs * w;
    dbase_y -= s.length * sn * w;
  }
  return {std::atan2(x, y), (y * dx - x * dy) / (x * x + y * y)};
}

DecParams DecParams::Standard() {
  // Gains of the humanoid controller. Delay, dead band and passive damping
  // are tuned here for a stable 100 Hz loop on the default body.
  auto joint = [](std::string name, double kp, double kd, double ext_gain) {
    JointGains g;
    g.name = std::move(name);
    g.kp = kp;
    g.kd = kd;
    g.loop_gain = 1.0;
    g.ext_gain = ext_gain;
    g.ext_cutoff = 5.0;
    g.delay = 0.01;
    return g;
  };
  DecParams p;
  p.joints = {
      joint("ankle", 119.57, 11.95, 0.5),
      joint("knee", 55.72, 0.4458, 0.5),
      joint("hip", 22.71, 5.67, 0.5),
      joint("pelvis", 10.59, 0.07, 0.0),
  };
  p.joints[0].loop_gain = 1.2;
  p.joints[0].controlled = ControlledVariable::kComSway;
  p.joints[0].threshold = 0.17 * kDegToRad;
  p.joints[0].kd_passive = 10.0;
  p.joints[1].kd_passive = 2.0;
  p.joints[2].kd_passive = 1.0;
  p.joints[3].kd_passive = 0.5;
  return p;
}

void DecParams::Validate() const {
  if (joints.empty() || NumJoints() > kMaxLinks) {
    throw ConfigError("joints", "1 to 4 joint modules required");
  }
  if (!(tick_rate > 0.0)) throw ConfigError("tick_rate", "must be > 0");
  for (const JointGains& g : joints) {
    auto check = [&g](double v, const char* field) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError(g.name + "." + field, "must be finite and >= 0");
      }
    };
    check(g.kp, "kp");
    check(g.kd, "kd");
    check(g.kp_passive, "kp_passive");
    check(g.kd_passive, "kd_passive");
    check(g.loop_gain, "loop_gain");
    check(g.ext_gain, "ext_gain");
    check(g.delay, "delay");
    check(g.threshold, "threshold");
    if (g.ext_gain > 0.0 &&
        (!(g.ext_cutoff > 0.0) || g.ext_cutoff >= std::numbers::pi * tick_rate)) {
      throw ConfigError(g.name + ".ext_cutoff",
                        "must be in (0, Nyquist) when ext_gain > 0");
    }
  }
}

DecParams DecParams::Truncated(int n) const {
  if (n < 1 || n > NumJoints()) {
    throw ConfigError("joints", "cannot keep " + std::to_string(n) +
                                    " of " + std::to_string(NumJoints()));
  }
  DecParams out = *this;
  out.joints.resize(n);
  return out;
}

const std::vector<std::string>& PresetNames() {
  static const std::vector<std::string> names = {"standard", "no-d",
                                                 "double-d", "g-1.0", "g-0.8"};
  return names;
}

DecParams Preset(const std::string& name) {
  DecParams p = DecParams::Standard();
  if (name == "standard") return p;
  if (name == "no-d") {
    p.joints[0].kd = 0.0;
    return p;
  }
  if (name == "double-d") {
    p.joints[0].kd *= 2.0;
    return p;
  }
  if (name == "g-1.0" || name == "g-0.8") {
    const double g = name == "g-1.0" ? 1.0 : 0.8;
    p.joints[0].loop_gain = g;
    return p;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

double Deadband(double x, double theta) {
  if (x > theta) return x - theta;
  if (x < -theta) return x + theta;
  return 0.0;
}

namespace {
int CheckedTicks(int ticks) {
  if (ticks < 0) throw ConfigError("delay", "negative delay");
  return ticks;
}
}  // namespace

DelayLine::DelayLine(int ticks)
    : ticks_(CheckedTicks(ticks)), buffer_(ticks_, 0.0) {}

double DelayLine::Push(double value) {
  if (ticks_ == 0) return value;
  if (static_cast<int>(buffer_.size()) != ticks_) {
    throw std::logic_error("delay line underrun");
  }
  buffer_.push_back(value);
  const double out = buffer_.front();
  buffer_.pop_front();
  return out;
}

double FootInSpaceEstimator::FootInSpaceRate(const SensorReadout& readout) {
  double rate = readout.head_velocity;
  for (double qd : readout.joint_velocities) rate -= qd;
  return rate;
}

double FootInSpaceEstimator::Update(const SensorReadout& readout,
                                    double threshold, double dt) {
  const double rate = Deadband(FootInSpaceRate(readout), threshold);
  estimate_ += 0.5 * dt * (previous_rate_ + rate);
  previous_rate_ = rate;
  return estimate_;
}

ButterworthLowPass::ButterworthLowPass(double cutoff_rad_s,
                                       double sample_rate) {
  const double k = std::tan(cutoff_rad_s / (2.0 * sample_rate));
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  sample_rate_ = sample_rate;
  b_[0] = k * k * norm;
  b_[1] = 2.0 * b_[0];
  b_[2] = b_[0];
  a_[0] = 2.0 * (k * k - 1.0) * norm;
  a_[1] = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
}

double ButterworthLowPass::Filter(double x) {
  const double y = b_[0] * x + b_[1] * x_[0] + b_[2] * x_[1] -
                   a_[0] * y_[0] - a_[1] * y_[1];
  x_[1] = x_[0];
  x_[0] = x;
  y_[1] = y_[0];
  y_[0] = y;
  return y;
}

ServoState::ServoState(const JointGains& gains, double tick_rate)
    : delay(static_cast<int>(std::lround(gains.delay * tick_rate))) {}

double ServoTorque(const JointGains& gains, const AngleAndRate& error,
                   const DisturbanceEstimates& disturbances,
                   double joint_angle, double joint_velocity,
                   ServoState& state) {
  const double input = -error.angle + disturbances.grav +
                       disturbances.trans + disturbances.push;
  const double derivative = -error.rate + disturbances.grav_rate +
                            disturbances.trans_rate + disturbances.push_rate;
  const double active =
      gains.loop_gain * (gains.kp * input + gains.kd * derivative);
  const double delayed = state.delay.Push(active);
  const double passive =
      gains.kp_passive * joint_angle + gains.kd_passive * joint_velocity;
  return delayed + passive;
}

AngleAndRate GravityAngleEquivalent(int joint, const std::vector<double>& phi,
                                    const std::vector<double>& phi_rate,
                                    const PlantParams& body, double kp) {
  if (kp <= 0.0) return {};
  double moment = 0.0, dmoment = 0.0;
  double lever = 0.0, dlever = 0.0;  // horizontal offset of the segment base
  for (std::size_t k = joint; k < phi.size(); ++k) {
    const Segment& s = body.segments[k];
    const double sn = std::sin(phi[k]);
    const double cs = std::cos(phi[k]);
    moment += s.mass * (lever + s.com_height * sn);
    dmoment += s.mass * (dlever + s.com_height * cs * phi_rate[k]);
    lever += s.length * sn;
    dlever += s.length * cs * phi_rate[k];
  }
  return {body.gravity * moment / kp, body.gravity * dmoment / kp};
}

DecController::DecController(DecParams params, PlantParams body)
    : params_(std::move(params)), body_(std::move(body)) {
  params_.Validate();
  body_.Validate();
  if (params_.NumJoints() != body_.NumLinks()) {
    throw DimensionError("controller has " +
                         std::to_string(params_.NumJoints()) +
                         " modules for a " + std::to_string(body_.NumLinks()) +
                         "-link body");
  }
  for (const JointGains& g : params_.joints) {
    servos_.emplace_back(g, params_.tick_rate);
    push_filters_.emplace_back(g.ext_gain > 0.0 ? g.ext_cutoff : 1.0,
                               params_.tick_rate);
  }
  last_.resize(params_.joints.size());
  corrective_.assign(params_.joints.size(), 0.0);
}

std::vector<double> DecController::Tick(const SensorReadout& readout) {
  const int n = params_.NumJoints();
  if (static_cast<int>(readout.joint_angles.size()) != n ||
      static_cast<int>(readout.joint_velocities.size()) != n) {
    throw DimensionError("readout does not match the controller");
  }
  const double dt = params_.TickPeriod();
  const double fs = fs_.Update(readout, params_.joints[0].threshold, dt);

  // Segment orientation in space, once from the vestibular head signal down
  // the joint chain and once from the foot-in-space estimate up the chain.
  std::vector<double> phi_vestibular(n), rate_vestibular(n);
  phi_vestibular[n - 1] = readout.head_angle;
  rate_vestibular[n - 1] = readout.head_velocity;
  for (int i = n - 2; i >= 0; --i) {
    phi_vestibular[i] = phi_vestibular[i + 1] - readout.joint_angles[i + 1];
    rate_vestibular[i] =
        rate_vestibular[i + 1] - readout.joint_velocities[i + 1];
  }
  std::vector<double> phi_proprio(n), rate_proprio(n);
  double angle = fs;
  double rate = fs_.rate();
  for (int i = 0; i < n; ++i) {
    angle += readout.joint_angles[i];
    rate += readout.joint_velocities[i];
    phi_proprio[i] = angle;
    rate_proprio[i] = rate;
  }

  std::vector<double> torques(n);
  for (int i = 0; i < n; ++i) {
    const JointGains& g = params_.joints[i];
    AngleAndRate error;
    if (g.controlled == ControlledVariable::kComSway) {
      const AngleAndRate sway = SwayAbove(i, phi_proprio, rate_proprio, body_);
      error = {-sway.angle, -sway.rate};
    } else {
      error = {-readout.joint_angles[i], -readout.joint_velocities[i]};
    }
    DisturbanceEstimates d;
    d.foot_in_space = fs;
    const AngleAndRate grav =
        GravityAngleEquivalent(i, phi_vestibular, rate_vestibular, body_, g.kp);
    d.grav = grav.angle;
    d.grav_rate = grav.rate;
    const double ext =
        i < static_cast<int>(readout.external_torques.size())
            ? readout.external_torques[i]
            : 0.0;
    const double filtered = push_filters_[i].Filter(ext);
    if (g.ext_gain > 0.0 && g.kp > 0.0) {
      d.push = g.ext_gain * filtered / g.kp;
      d.push_rate = g.ext_gain * push_filters_[i].Slope() / g.kp;
    }
    const double corrective =
        ServoTorque(g, error, d, readout.joint_angles[i],
                    readout.joint_velocities[i], servos_[i]);
    last_[i] = d;
    corrective_[i] = corrective;
    torques[i] = -corrective;
  }
  return torques;
}

namespace {

std::string ControlledName(ControlledVariable v) {
  return v == ControlledVariable::kComSway ? "com_sway" : "joint_angle";
}

ControlledVariable ControlledFromName(const std::string& s) {
  if (s == "com_sway") return ControlledVariable::kComSway;
  if (s == "joint_angle") return ControlledVariable::kJointAngle;
  throw ConfigError("controlled_variable", "unknown value '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const JointGains& g) {
  j = nlohmann::json{{"name", g.name},
                     {"kp", g.kp},
                     {"kd", g.kd},
                     {"kp_passive", g.kp_passive},
                     {"kd_passive", g.kd_passive},
                     {"loop_gain", g.loop_gain},
                     {"ext_gain", g.ext_gain},
                     {"ext_cutoff_rad_s", g.ext_cutoff},
                     {"delay_s", g.delay},
                     {"threshold_rad_s", g.threshold},
                     {"controlled_variable", ControlledName(g.controlled)}};
}

void from_json(const nlohmann::json& j, JointGains& g) {
  g.name = j.value("name", g.name);
  g.kp = j.value("kp", g.kp);
  g.kd = j.value("kd", g.kd);
  g.kp_passive = j.value("kp_passive", g.kp_passive);
  g.kd_passive = j.value("kd_passive", g.kd_passive);
  g.loop_gain = j.value("loop_gain", g.loop_gain);
  g.ext_gain = j.value("ext_gain", g.ext_gain);
  g.ext_cutoff = j.value("ext_cutoff_rad_s", g.ext_cutoff);
  g.delay = j.value("delay_s", g.delay);
  g.threshold = j.value("threshold_rad_s", g.threshold);
  if (j.contains("controlled_variable")) {
    g.controlled =
        ControlledFromName(j.at("controlled_variable").get<std::string>());
  }
}

void to_json(nlohmann::json& j, const DecParams& p) {
  j = nlohmann::json{{"tick_rate_hz", p.tick_rate}, {"joints", p.joints}};
}

void from_json(const nlohmann::json& j, DecParams& p) {
  p = Preset(j.value("preset", std::string("standard")));
  p.tick_rate = j.value("tick_rate_hz", p.tick_rate);
  if (j.contains("joints")) {
    const auto& joints = j.at("joints");
    if (joints.size() > static_cast<std::size_t>(kMaxLinks)) {
      throw ConfigError("joints", "at most 4 joint modules");
    }
    p.joints.resize(joints.size());
    for (std::size_t i = 0; i < joints.size(); ++i) {
      JointGains g = p.joints[i];
      from_json(joints[i], g);
      p.joints[i] = g;
    }
  }
  p.Validate();
}

}  // namespace swaybench
