#pragma once

#include <random>

#include "armopt/dynamics.hpp"

namespace armopt::testutil {

inline ArmParams canonical_arm() {
  ArmParams arm;
  arm.link_lengths = Vec3(1.0, 0.8, 0.6);
  arm.link_masses = Vec3(4.0, 3.0, 2.0);
  arm.gravity_accel = 9.81;
  arm.torque_limits = Vec3(120.0, 60.0, 30.0);
  return arm;
}

inline ArmParams unit_arm() {
  ArmParams arm;
  arm.link_lengths = Vec3(1.0, 0.8, 0.6);
  arm.link_masses = Vec3(1.0, 1.0, 1.0);
  arm.gravity_accel = 9.81;
  arm.torque_limits = Vec3(120.0, 60.0, 30.0);
  return arm;
}

class Rng {
 public:
  explicit Rng(unsigned seed = 12345) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Vec3 angles() {
    return Vec3(uniform(-3.14, 3.14), uniform(-3.14, 3.14), uniform(-3.14, 3.14));
  }
  Vec3 rates(double scale = 2.0) {
    return Vec3(uniform(-scale, scale), uniform(-scale, scale),
                uniform(-scale, scale));
  }

 private:
  std::mt19937 gen_;
};

}  // namespace armopt::testutil
