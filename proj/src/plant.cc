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

#include "swaybench/plant.h"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace swaybench {
namespace {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxLinks, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                          kMaxLinks, kMaxLinks>;

// Configuration-independent coefficients of the chain dynamics in absolute
// angles. With a_ki the lever of segment i in the position of COM k
// (L_i if i < k, c_i if i == k, 0 otherwise):
//   coupling(i,j) = sum_k m_k a_ki a_kj
//   gravity_lever(i) = sum_k m_k a_ki
struct ChainCoefficients {
  Mat coupling;
  Vec gravity_lever;
  Vec inertia;

  explicit ChainCoefficients(const PlantParams& p) {
    const int n = p.NumLinks();
    coupling.setZero(n, n);
    gravity_lever.setZero(n);
    inertia.setZero(n);
    for (int i = 0; i < n; ++i) {
      double mass_above = 0.0;
      for (int k = i + 1; k < n; ++k) mass_above += p.segments[k].mass;
      const Segment& s = p.segments[i];
      gravity_lever(i) = s.mass * s.com_height + s.length * mass_above;
      coupling(i, i) = s.mass * s.com_height * s.com_height +
                       s.length * s.length * mass_above;
      inertia(i) = s.inertia;
      for (int j = i + 1; j < n; ++j) {
        double beyond = 0.0;
        for (int k = j + 1; k < n; ++k) beyond += p.segments[k].mass;
        const Segment& sj = p.segments[j];
        coupling(i, j) =
            s.length * (sj.mass * sj.com_height + sj.length * beyond);
        coupling(j, i) = coupling(i, j);
      }
    }
  }
};

// M(phi) phi_dd + sum_j B_ij sin(phi_i - phi_j) phid_j^2 - g G_i sin(phi_i)
//   = tau_i - tau_{i+1}
Vec Accelerations(const ChainCoefficients& c, double gravity, const Vec& phi,
                  const Vec& phid, const Vec& generalized) {
  const int n = static_cast<int>(phi.size());
  Mat mass(n, n);
  Vec rhs(n);
  for (int i = 0; i < n; ++i) {
    double velocity_terms = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = phi(i) - phi(j);
      mass(i, j) = c.coupling(i, j) * std::cos(d);
      velocity_terms += c.coupling(i, j) * std::sin(d) * phid(j) * phid(j);
    }
    mass(i, i) += c.inertia(i);
    rhs(i) = generalized(i) - velocity_terms +
             gravity * c.gravity_lever(i) * std::sin(phi(i));
  }
  return mass.llt().solve(rhs);
}

}  // namespace

double ThinRodInertia(double mass, double length) {
  return mass * length * length / 12.0;
}

PlantParams PlantParams::Default() {
  PlantParams p;
  auto segment = [](std::string name, double mass, double com,
                    double length) {
    return Segment{std::move(name), mass, com, length,
                   ThinRodInertia(mass, length)};
  };
  p.segments = {
      segment("shank", 3.00, 0.32, 0.36),
      segment("thigh", 2.80, 0.31, 0.34),
      segment("pelvis", 8.00, 0.0435, 0.30),
      segment("trunk", 1.50, 0.08, 0.52),
  };
  return p;
}

PlantParams PlantParams::WithLinkCount(int n) const {
  if (n < 1 || n > NumLinks()) {
    throw ConfigError("link_count", "must be in [1, " +
                                        std::to_string(NumLinks()) + "]");
  }
  PlantParams out = *this;
  if (n == NumLinks()) return out;
  out.segments.resize(n);

  // Merge segments n-1.. in upright (collinear) posture.
  double mass = 0.0;
  double first_moment = 0.0;
  double length = 0.0;
  double base = 0.0;
  std::string name;
  for (int k = n - 1; k < NumLinks(); ++k) {
    const Segment& s = segments[k];
    mass += s.mass;
    first_moment += s.mass * (base + s.com_height);
    base += s.length;
    name += (name.empty() ? "" : "+") + s.name;
  }
  length = base;
  const double com = first_moment / mass;
  double inertia = 0.0;
  base = 0.0;
  for (int k = n - 1; k < NumLinks(); ++k) {
    const Segment& s = segments[k];
    const double offset = base + s.com_height - com;
    inertia += s.inertia + s.mass * offset * offset;
    base += s.length;
  }
  out.segments[n - 1] = Segment{name, mass, com, length, inertia};
  return out;
}

double PlantParams::TotalMass() const {
  double m = 0.0;
  for (const Segment& s : segments) m += s.mass;
  return m;
}

double PlantParams::UprightComHeight() const {
  double moment = 0.0;
  double base = 0.0;
  for (const Segment& s : segments) {
    moment += s.mass * (base + s.com_height);
    base += s.length;
  }
  return moment / TotalMass();
}

double PlantParams::TotalHeight() const {
  double h = 0.0;
  for (const Segment& s : segments) h += s.length;
  return h;
}

double PlantParams::UprightInertiaAboutAnkle() const {
  double inertia = 0.0;
  double base = 0.0;
  for (const Segment& s : segments) {
    const double h = base + s.com_height;
    inertia += s.inertia + s.mass * h * h;
    base += s.length;
  }
  return inertia;
}

void PlantParams::Validate() const {
  if (segments.empty() || NumLinks() > kMaxLinks) {
    throw ConfigError("segments", "1 to 4 segments required");
  }
  for (const Segment& s : segments) {
    if (!(s.mass > 0.0)) throw ConfigError(s.name + ".mass", "must be > 0");
    if (!(s.length > 0.0)) {
      throw ConfigError(s.name + ".length", "must be > 0");
    }
    if (s.com_height < 0.0 || s.com_height > s.length) {
      throw ConfigError(s.name + ".com_height", "must be in [0, length]");
    }
    if (s.inertia < 0.0) {
      throw ConfigError(s.name + ".inertia", "must be >= 0");
    }
  }
  if (!std::isfinite(gravity)) throw ConfigError("gravity", "must be finite");
  if (!(fall_guard > 0.0)) throw ConfigError("fall_guard", "must be > 0");
}

PlantState PlantState::Upright(int num_links) {
  PlantState s;
  s.q.assign(num_links, 0.0);
  s.qd.assign(num_links, 0.0);
  return s;
}

std::vector<double> SegmentAngles(const PlantState& state) {
  std::vector<double> phi(state.q.size());
  double acc = state.tilt;
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    acc += state.q[i];
    phi[i] = acc;
  }
  return phi;
}

std::vector<double> SegmentRates(const PlantState& state) {
  std::vector<double> rates(state.qd.size());
  double acc = state.tilt_rate;
  for (std::size_t i = 0; i < state.qd.size(); ++i) {
    acc += state.qd[i];
    rates[i] = acc;
  }
  return rates;
}

double ComSwayFromSegmentAngles(std::span<const double> phi,
                                const PlantParams& params) {
  double x = 0.0;
  double y = 0.0;
  double base_x = 0.0;
  double base_y = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const Segment& s = params.segments[i];
    const double sn = std::sin(phi[i]);
    const double cs = std::cos(phi[i]);
    x += s.mass * (base_x + s.com_height * sn);
    y += s.mass * (base_y + s.com_height * cs);
    base_x += s.length * sn;
    base_y += s.length * cs;
  }
  return std::atan2(x, y);
}

double ComSway(const PlantState& state, const PlantParams& params) {
  const std::vector<double> phi = SegmentAngles(state);
  return ComSwayFromSegmentAngles(phi, params);
}

PlantState Step(const PlantState& state, std::span<const double> torques,
                double tilt_command, double dt, const PlantParams& params) {
  const int n = params.NumLinks();
  if (!(dt > 0.0) || dt > 0.01) {
    throw ConfigError("dt", "must be in (0, 0.01]");
  }
  if (static_cast<int>(torques.size()) != n ||
      static_cast<int>(state.q.size()) != n ||
      static_cast<int>(state.qd.size()) != n) {
    throw DimensionError("plant has " + std::to_string(n) + " joints");
  }
  Vec generalized(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(torques[i])) {
      throw ConfigError("torques", "non-finite torque at joint " +
                                       std::to_string(i));
    }
    generalized(i) = torques[i] - (i + 1 < n ? torques[i + 1] : 0.0);
  }

  const ChainCoefficients coeffs(params);
  const std::vector<double> phi0 = SegmentAngles(state);
  const std::vector<double> rate0 = SegmentRates(state);
  Vec x(n);
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    x(i) = phi0[i];
    v(i) = rate0[i];
  }

  const double g = params.gravity;
  const Vec k1v = Accelerations(coeffs, g, x, v, generalized);
  const Vec k1x = v;
  const Vec k2v = Accelerations(coeffs, g, x + 0.5 * dt * k1x,
                                v + 0.5 * dt * k1v, generalized);
  const Vec k2x = v + 0.5 * dt * k1v;
  const Vec k3v = Accelerations(coeffs, g, x + 0.5 * dt * k2x,
                                v + 0.5 * dt * k2v, generalized);
  const Vec k3x = v + 0.5 * dt * k2v;
  const Vec k4v =
      Accelerations(coeffs, g, x + dt * k3x, v + dt * k3v, generalized);
  const Vec k4x = v + dt * k3v;
  x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

  PlantState next;
  next.time = state.time + dt;
  next.tilt = tilt_command;
  next.tilt_rate = (tilt_command - state.tilt) / dt;
  next.q.resize(n);
  next.qd.resize(n);
  double prev_angle = next.tilt;
  double prev_rate = next.tilt_rate;
  for (int i = 0; i < n; ++i) {
    next.q[i] = x(i) - prev_angle;
    next.qd[i] = v(i) - prev_rate;
    prev_angle = x(i);
    prev_rate = v(i);
  }

  const double sway = ComSway(next, params);
  if (std::abs(sway) >= params.fall_guard) {
    throw FallError(next.time, next,
                    "fall at t=" + std::to_string(next.time) +
                        " s: |COM sway| = " + std::to_string(std::abs(sway)) +
                        " rad");
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(next.q[i]) >= std::numbers::pi / 2 || !std::isfinite(next.q[i])) {
      throw FallError(next.time, next,
                      "fall at t=" + std::to_string(next.time) + " s: joint " +
                          std::to_string(i) + " beyond pi/2");
    }
  }
  return next;
}

double MechanicalEnergy(const PlantState& state, const PlantParams& params) {
  const ChainCoefficients c(params);
  const std::vector<double> phi = SegmentAngles(state);
  const std::vector<double> rate = SegmentRates(state);
  const int n = params.NumLinks();
  double kinetic = 0.0;
  double potential = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      kinetic += 0.5 * c.coupling(i, j) * std::cos(phi[i] - phi[j]) *
                 rate[i] * rate[j];
    }
    kinetic += 0.5 * c.inertia(i) * rate[i] * rate[i];
    potential += params.gravity * c.gravity_lever(i) * std::cos(phi[i]);
  }
  return kinetic + potential;
}

void SensorNoise::Validate() const {
  if (joint_angle < 0 || joint_velocity < 0 || vestibular_angle < 0 ||
      vestibular_velocity < 0 || torque < 0) {
    throw ConfigError("sensor_noise", "standard deviations must be >= 0");
  }
}

SensorReadout ReadSensors(const PlantState& state, const PlantParams& params,
                          std::span<const double> applied_torques,
                          const SensorNoise& noise, std::mt19937_64& rng) {
  const int n = params.NumLinks();
  auto draw = [&rng](double std_dev) {
    if (std_dev == 0.0) return 0.0;
    std::normal_distribution<double> dist(0.0, std_dev);
    return dist(rng);
  };
  SensorReadout r;
  r.time = state.time;
  r.joint_angles.resize(n);
  r.joint_velocities.resize(n);
  r.external_torques.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    r.joint_angles[i] = state.q[i] + draw(noise.joint_angle);
    r.joint_velocities[i] = state.qd[i] + draw(noise.joint_velocity);
  }
  const std::vector<double> phi = SegmentAngles(state);
  const std::vector<double> rate = SegmentRates(state);
  r.head_angle = phi.back() + draw(noise.vestibular_angle);
  r.head_velocity = rate.back() + draw(noise.vestibular_velocity);
  r.ankle_torque =
      (applied_torques.empty() ? 0.0 : applied_torques[0]) + draw(noise.torque);
  for (int i = 0; i < n; ++i) r.external_torques[i] += draw(noise.torque);
  return r;
}

void to_json(nlohmann::json& j, const Segment& s) {
  j = nlohmann::json{{"name", s.name},
                     {"mass_kg", s.mass},
                     {"com_height_m", s.com_height},
                     {"length_m", s.length},
                     {"inertia_kgm2", s.inertia}};
}

void from_json(const nlohmann::json& j, Segment& s) {
  s.name = j.at("name").get<std::string>();
  s.mass = j.at("mass_kg").get<double>();
  s.com_height = j.at("com_height_m").get<double>();
  s.length = j.at("length_m").get<double>();
  s.inertia = j.contains("inertia_kgm2")
                  ? j.at("inertia_kgm2").get<double>()
                  : ThinRodInertia(s.mass, s.length);
}

void to_json(nlohmann::json& j, const PlantParams& p) {
  j = nlohmann::json{{"segments", p.segments},
                     {"gravity", p.gravity},
                     {"fall_guard_rad", p.fall_guard},
                     {"foot_length_m", p.foot_length}};
}

void from_json(const nlohmann::json& j, PlantParams& p) {
  const PlantParams d = PlantParams::Default();
  p.segments = j.contains("segments")
                   ? j.at("segments").get<std::vector<Segment>>()
                   : d.segments;
  p.gravity = j.value("gravity", d.gravity);
  p.fall_guard = j.value("fall_guard_rad", d.fall_guard);
  p.foot_length = j.value("foot_length_m", d.foot_length);
  if (j.contains("link_count")) {
    p = p.WithLinkCount(j.at("link_count").get<int>());
  }
}

void to_json(nlohmann::json& j, const SensorNoise& n) {
  j = nlohmann::json{{"joint_angle_rad", n.joint_angle},
                     {"joint_velocity_rad_s", n.joint_velocity},
                     {"vestibular_angle_rad", n.vestibular_angle},
                     {"vestibular_velocity_rad_s", n.vestibular_velocity},
                     {"torque_nm", n.torque}};
}

void from_json(const nlohmann::json& j, SensorNoise& n) {
  n.joint_angle = j.value("joint_angle_rad", 0.0);
  n.joint_velocity = j.value("joint_velocity_rad_s", 0.0);
  n.vestibular_angle = j.value("vestibular_angle_rad", 0.0);
  n.vestibular_velocity = j.value("vestibular_velocity_rad_s", 0.0);
  n.torque = j.value("torque_nm", 0.0);
}

}  // namespace swaybench
