#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "json_format.hpp"

namespace epiportrait {

struct Vec2 {
  double x = 0;
  double y = 0;
  bool operator==(const Vec2&) const = default;
};

// A portrait disc in the Portrait View. Coordinates are centred on the
// viewport: x in [-w/2, w/2], y in [-h/2, h/2].
struct LayoutBody {
  std::string code;
  std::optional<Vec2> position;  // unset bodies are seeded on a spiral
  double radius = 1;
  bool pinned = false;
  std::optional<Vec2> pin_position;

  bool operator==(const LayoutBody&) const = default;
};

struct Viewport {
  double width = 0;
  double height = 0;
};

struct LayoutParams {
  std::uint64_t seed = 0;
  int max_iter = 2000;
  double damping = 0.9;
  double stiffness = 0.5;   // repulsion per unit overlap depth
  double centering = 0.01;  // pull toward the origin
  int centering_iters = 100;  // the pull fades linearly to zero over these steps
  double dt = 1.0;
  double max_fill = 0.7;    // disc area / viewport area ceiling
  std::size_t grid_threshold = 64;  // spatial hashing above this many bodies
};

struct LayoutResult {
  std::vector<LayoutBody> bodies;
  bool converged = false;
  int iterations = 0;
};

// Raised when the discs cannot fit; carries the zoom-out factor that would
// bring coverage back to the fill ceiling.
struct LayoutCapacityError : InvalidArgument {
  double suggested_scale;
  LayoutCapacityError(const std::string& what, double scale) : InvalidArgument(what), suggested_scale(scale) {}
};

inline constexpr double kLayoutEpsilon = 1e-6;

namespace detail {

// Unordered body pairs (i < j) whose discs may touch, in lexicographic order.
// Above 64 bodies candidates come from a uniform grid; the sorted result is
// the same subset of pairs the naive scan would visit with overlap.
inline std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const std::vector<Vec2>& pos,
                                                                       const std::vector<double>& rad,
                                                                       double slack, bool use_grid) {
  const std::size_t n = pos.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto touching = [&](std::size_t i, std::size_t j) {
    const double dx = pos[j].x - pos[i].x, dy = pos[j].y - pos[i].y;
    const double lim = rad[i] + rad[j] + slack;
    return dx * dx + dy * dy < lim * lim;
  };
  if (!use_grid) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (touching(i, j)) pairs.emplace_back(i, j);
    return pairs;
  }
  const double cell = 2.0 * *std::max_element(rad.begin(), rad.end()) + slack;
  double minx = pos[0].x, miny = pos[0].y;
  for (const auto& p : pos) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
  }
  std::vector<std::pair<std::int64_t, std::size_t>> keyed;  // (cell key, body)
  keyed.reserve(n);
  const std::int64_t stride = 1 << 20;
  auto cell_of = [&](const Vec2& p) {
    return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor((p.x - minx) / cell)),
                                                 static_cast<std::int64_t>(std::floor((p.y - miny) / cell))};
  };
  for (std::size_t i = 0; i < n; ++i) {
    auto [cx, cy] = cell_of(pos[i]);
    keyed.emplace_back(cx * stride + cy, i);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto [cx, cy] = cell_of(pos[i]);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const std::int64_t key = (cx + dx) * stride + (cy + dy);
        auto it = std::lower_bound(keyed.begin(), keyed.end(), std::pair<std::int64_t, std::size_t>{key, 0});
        for (; it != keyed.end() && it->first == key; ++it)
          if (it->second > i && touching(i, it->second)) pairs.emplace_back(i, it->second);
      }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace detail

// Resolves overlaps between portrait discs with a damped, overlap-driven
// repulsion plus a position-correction pass each step. Pinned bodies stay
// exactly at their pin. Deterministic for a given (bodies, seed).
inline LayoutResult run_layout(std::vector<LayoutBody> bodies, const Viewport& vp, const LayoutParams& params = {}) {
  if (!(vp.width > 0) || !(vp.height > 0)) throw InvalidArgument("layout: viewport must be positive");
  double disc_area = 0;
  for (const auto& b : bodies) {
    if (!(b.radius > 0)) throw InvalidArgument("layout: body '" + b.code + "' has non-positive radius");
    if (b.pinned && !b.pin_position) throw InvalidArgument("layout: pinned body '" + b.code + "' lacks a pin position");
    disc_area += std::numbers::pi * b.radius * b.radius;
  }
  const double capacity = params.max_fill * vp.width * vp.height;
  if (disc_area > capacity) {
    const double scale = std::sqrt(disc_area / capacity);
    throw LayoutCapacityError("layout: portraits cover more than " + std::to_string(params.max_fill * 100) +
                                  "% of the viewport; zoom out by " + std::to_string(scale),
                              scale);
  }

  const std::size_t n = bodies.size();
  LayoutResult res;
  if (n == 0) {
    res.converged = true;
    return res;
  }

  std::mt19937_64 rng(params.seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // Seed positions: pins, given positions, else a golden-angle spiral.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double rotation = uniform() * 2.0 * std::numbers::pi;
  double mean_r = 0;
  for (const auto& b : bodies) mean_r += b.radius;
  mean_r /= static_cast<double>(n);
  std::vector<Vec2> pos(n), vel(n);
  std::vector<double> rad(n);
  std::vector<bool> fixed(n);
  const double half_w = vp.width / 2, half_h = vp.height / 2;
  auto clamp_inside = [&](std::size_t i) {
    const double rx = std::min(rad[i], half_w), ry = std::min(rad[i], half_h);
    pos[i].x = std::clamp(pos[i].x, -half_w + rx, half_w - rx);
    pos[i].y = std::clamp(pos[i].y, -half_h + ry, half_h - ry);
  };
  for (std::size_t i = 0; i < n; ++i) {
    rad[i] = bodies[i].radius;
    fixed[i] = bodies[i].pinned;
    if (fixed[i]) {
      pos[i] = *bodies[i].pin_position;
    } else if (bodies[i].position) {
      pos[i] = *bodies[i].position;
    } else {
      const double r = 2.0 * mean_r * std::sqrt(static_cast<double>(i) + 0.5);
      const double a = rotation + golden * static_cast<double>(i);
      pos[i] = {r * std::sin(a), -r * std::cos(a)};
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!fixed[i]) clamp_inside(i);

  const bool use_grid = n > params.grid_threshold;
  const double slack = 1e-9 * mean_r;
  auto max_violation = [&] {
    double worst = 0;
    for (const auto& [i, j] : detail::candidate_pairs(pos, rad, 0.0, use_grid)) {
      const double d = std::hypot(pos[j].x - pos[i].x, pos[j].y - pos[i].y);
      worst = std::max(worst, rad[i] + rad[j] - d);
    }
    return worst;
  };

  // Direction for coincident centres, drawn from the seeded stream.
  auto random_dir = [&] {
    const double a = uniform() * 2.0 * std::numbers::pi;
    return Vec2{std::cos(a), std::sin(a)};
  };

  std::vector<Vec2> force(n), shift(n);
  int iter = 0;
  bool converged = n == 1 || max_violation() < kLayoutEpsilon;
  for (; !converged && iter < params.max_iter; ++iter) {
    const auto pairs = detail::candidate_pairs(pos, rad, slack, use_grid);

    std::fill(force.begin(), force.end(), Vec2{});
    const double pull =
        params.centering * std::max(0.0, 1.0 - static_cast<double>(iter) / std::max(1, params.centering_iters));
    for (std::size_t i = 0; i < n; ++i) force[i] = {-pull * pos[i].x, -pull * pos[i].y};
    for (const auto& [i, j] : pairs) {
      double dx = pos[j].x - pos[i].x, dy = pos[j].y - pos[i].y;
      double d = std::hypot(dx, dy);
      double overlap = rad[i] + rad[j] + slack - d;
      if (d == 0) {
        auto u = random_dir();
        dx = u.x, dy = u.y, d = 1;
      }
      if (overlap <= 0) continue;
      const double fx = params.stiffness * overlap * dx / d, fy = params.stiffness * overlap * dy / d;
      force[i].x -= fx, force[i].y -= fy;
      force[j].x += fx, force[j].y += fy;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      vel[i].x = (vel[i].x + force[i].x * params.dt) * params.damping;
      vel[i].y = (vel[i].y + force[i].y * params.dt) * params.damping;
      pos[i].x += vel[i].x * params.dt;
      pos[i].y += vel[i].y * params.dt;
      clamp_inside(i);
    }

    // Position correction: split each remaining overlap between the two
    // bodies (all of it onto the free one if the other is pinned).
    std::fill(shift.begin(), shift.end(), Vec2{});
    for (const auto& [i, j] : detail::candidate_pairs(pos, rad, slack, use_grid)) {
      if (fixed[i] && fixed[j]) continue;
      double dx = pos[j].x - pos[i].x, dy = pos[j].y - pos[i].y;
      double d = std::hypot(dx, dy);
      if (d == 0) {
        auto u = random_dir();
        dx = u.x, dy = u.y, d = 1;
        const double depth = rad[i] + rad[j] + slack;
        const double wi = fixed[i] ? 0 : (fixed[j] ? 1 : 0.5), wj = 1 - wi;
        shift[i].x -= wi * depth * dx, shift[i].y -= wi * depth * dy;
        shift[j].x += wj * depth * dx, shift[j].y += wj * depth * dy;
        continue;
      }
      const double depth = rad[i] + rad[j] + slack - d;
      if (depth <= 0) continue;
      const double wi = fixed[i] ? 0 : (fixed[j] ? 1 : 0.5), wj = 1 - wi;
      shift[i].x -= wi * depth * dx / d, shift[i].y -= wi * depth * dy / d;
      shift[j].x += wj * depth * dx / d, shift[j].y += wj * depth * dy / d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      pos[i].x += shift[i].x;
      pos[i].y += shift[i].y;
      clamp_inside(i);
    }
    converged = max_violation() < kLayoutEpsilon;
  }

  for (std::size_t i = 0; i < n; ++i) {
    bodies[i].position = fixed[i] ? *bodies[i].pin_position : pos[i];
  }
  res.bodies = std::move(bodies);
  res.converged = converged;
  res.iterations = iter;
  return res;
}

inline std::vector<LayoutBody> pin(std::vector<LayoutBody> bodies, std::string_view code, Vec2 at) {
  auto it = std::find_if(bodies.begin(), bodies.end(), [&](const auto& b) { return b.code == code; });
  if (it == bodies.end()) throw NotFound("layout: no body '" + std::string(code) + "'");
  it->pinned = true;
  it->pin_position = at;
  it->position = at;
  return bodies;
}

inline std::vector<LayoutBody> unpin(std::vector<LayoutBody> bodies, std::string_view code) {
  auto it = std::find_if(bodies.begin(), bodies.end(), [&](const auto& b) { return b.code == code; });
  if (it == bodies.end()) throw NotFound("layout: no body '" + std::string(code) + "'");
  it->pinned = false;
  it->pin_position.reset();
  return bodies;
}

inline Json layout_to_json(const LayoutResult& r) {
  Json bodies = Json::array();
  for (const auto& b : r.bodies) {
    const Vec2 p = b.position.value_or(Vec2{});
    bodies.push_back({{"code", b.code}, {"x", p.x}, {"y", p.y}, {"r", b.radius}, {"pinned", b.pinned}});
  }
  return {{"bodies", std::move(bodies)}, {"converged", r.converged}, {"iterations", r.iterations}};
}

}  // namespace epiportrait
