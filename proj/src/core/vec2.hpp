#pragma once

#include <cmath>
#include <optional>

namespace intentsim {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(Vec2 v) { x += v.x; y += v.y; return *this; }
  constexpr Vec2& operator-=(Vec2 v) { x -= v.x; y -= v.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// 2-D cross product; positive when b points counterclockwise of a.
constexpr double det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

constexpr double norm_sq(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Unit vector; the zero vector maps to itself.
inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  return n > 0.0 ? Vec2{v.x / n, v.y / n} : Vec2{};
}

inline Vec2 from_angle(double rad) { return {std::cos(rad), std::sin(rad)}; }
inline double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

inline Vec2 rotated(Vec2 v, double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Angle swept from a to b in [-pi, pi]; positive counterclockwise.
inline double signed_angle(Vec2 a, Vec2 b) { return std::atan2(det(a, b), dot(a, b)); }

/// Symmetric 2x2 matrix stored as its upper triangle.
struct Sym2 {
  double xx{0.0};
  double xy{0.0};
  double yy{0.0};

  static constexpr Sym2 isotropic(double variance) { return {variance, 0.0, variance}; }

  constexpr double determinant() const { return xx * yy - xy * xy; }
  constexpr double trace() const { return xx + yy; }
  constexpr bool spd() const { return xx > 0.0 && determinant() > 0.0; }

  constexpr Sym2 inflated(double add) const { return {xx + add, xy, yy + add}; }

  /// Inverse; caller guarantees spd().
  constexpr Sym2 inverse() const {
    const double d = determinant();
    return {yy / d, -xy / d, xx / d};
  }

  /// x' M x.
  constexpr double quad(Vec2 v) const {
    return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y;
  }

  /// Lower-triangular Cholesky factor [[a,0],[b,c]]; empty unless spd.
  struct Chol { double a, b, c; };
  std::optional<Chol> cholesky() const {
    if (!spd()) return std::nullopt;
    const double a = std::sqrt(xx);
    const double b = xy / a;
    const double c2 = yy - b * b;
    if (c2 <= 0.0) return std::nullopt;
    return Chol{a, b, std::sqrt(c2)};
  }

  /// Eigenvalues (descending) and the unit eigenvector of the larger one.
  struct Eigen { double major, minor; Vec2 axis; };
  Eigen eigen() const {
    const double half = 0.5 * (xx + yy);
    const double diff = 0.5 * (xx - yy);
    const double r = std::sqrt(diff * diff + xy * xy);
    Eigen e{half + r, half - r, {1.0, 0.0}};
    if (r > 1e-300) {
      // Eigenvector of the major value; pick the better-conditioned column.
      Vec2 v1{diff + r, xy};
      Vec2 v2{xy, r - diff};
      e.axis = normalized(norm_sq(v1) >= norm_sq(v2) ? v1 : v2);
    }
    return e;
  }
};

inline Vec2 chol_apply(const Sym2::Chol& l, Vec2 z) {
  return {l.a * z.x, l.b * z.x + l.c * z.y};
}

}  // namespace intentsim
