#ifndef GPCC__GEOMETRY_HPP_
#define GPCC__GEOMETRY_HPP_

#include <cmath>
#include <numbers>
#include <vector>

namespace gpcc
{

/// A 2-D position or displacement in scene units.
struct Vec2
{
  double x{0.0};
  double y{0.0};

  constexpr Vec2 & operator+=(const Vec2 & o) noexcept
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 & operator-=(const Vec2 & o) noexcept
  {
    x -= o.x;
    y -= o.y;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2 & b) noexcept { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2 & b) noexcept { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2 & a) noexcept { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, const Vec2 & a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;

  double norm() const noexcept { return std::hypot(x, y); }
};

/// Positions of one agent at consecutive sampled frames.
using Track = std::vector<Vec2>;

inline double distance(const Vec2 & a, const Vec2 & b) noexcept { return (a - b).norm(); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) noexcept
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) {
    a += two_pi;
  }
  return a;
}

inline double degrees_to_radians(double deg) noexcept { return deg * std::numbers::pi / 180.0; }

/// Rotation by `angle` about the origin followed by a translation.
struct RigidTransform
{
  double angle{0.0};
  Vec2 shift{};

  Vec2 operator()(const Vec2 & p) const noexcept
  {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y};
  }

  Track operator()(const Track & t) const
  {
    Track out;
    out.reserve(t.size());
    for (const auto & p : t) {
      out.push_back((*this)(p));
    }
    return out;
  }
};

}  // namespace gpcc

#endif  // GPCC__GEOMETRY_HPP_
