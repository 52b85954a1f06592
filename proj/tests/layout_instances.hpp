#pragma once

// Seeded random layout problems shared by the unit and acceptance suites.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "epiportrait/layout.hpp"

struct LayoutInstance {
  std::vector<epiportrait::LayoutBody> bodies;
  epiportrait::Viewport viewport;
};

// n = 0 draws the body count from [2, 128]; fill = 0 draws the disc coverage
// from [0.05, 0.55]. Some instances carry up to three well-separated pins.
inline LayoutInstance layout_instance(std::uint64_t seed, std::size_t n = 0, double fill = 0) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  if (n == 0) n = 2 + rng() % 127;
  if (fill == 0) fill = uni(0.05, 0.55);
  LayoutInstance inst;
  double area = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = uni(40, 75);
    area += std::numbers::pi * r * r;
    inst.bodies.push_back({"C" + std::to_string(i), {}, r});
  }
  const double aspect = 1.6;
  const double h = std::sqrt(area / fill / aspect);
  inst.viewport = {aspect * h, h};
  if (n >= 12 && rng() % 3 == 0) {
    const std::size_t pins = 1 + rng() % 3;
    const epiportrait::Vec2 spots[3] = {{-inst.viewport.width / 4, 0}, {inst.viewport.width / 4, 0},
                                        {0, inst.viewport.height / 4}};
    for (std::size_t k = 0; k < pins; ++k) {
      auto& b = inst.bodies[k * (n / 3)];
      b.pinned = true;
      b.pin_position = spots[k];
    }
  }
  return inst;
}
