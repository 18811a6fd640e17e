#pragma once

// Small fixed-size 3D vector and matrix types. Matrices are stored
// row-major; lattice bases are interpreted column-wise (one edge vector
// per column).

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace flowcell {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double max_abs(const Vec3& a) {
  return std::fmax(std::fabs(a.x), std::fmax(std::fabs(a.y), std::fabs(a.z)));
}

struct IVec3 {
  std::int64_t x = 0, y = 0, z = 0;
  constexpr std::int64_t operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr std::int64_t& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr bool operator==(const IVec3&, const IVec3&) = default;
  friend constexpr auto operator<=>(const IVec3&, const IVec3&) = default;
};

inline Vec3 to_real(const IVec3& n) {
  return {static_cast<double>(n.x), static_cast<double>(n.y), static_cast<double>(n.z)};
}

struct Mat3 {
  std::array<double, 9> a{};

  static constexpr Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static constexpr Mat3 diagonal(double d0, double d1, double d2) {
    return Mat3{{d0, 0, 0, 0, d1, 0, 0, 0, d2}};
  }
  static constexpr Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return Mat3{{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
  }

  constexpr double operator()(int r, int c) const { return a[r * 3 + c]; }
  constexpr double& operator()(int r, int c) { return a[r * 3 + c]; }

  constexpr Vec3 col(int c) const { return {a[c], a[3 + c], a[6 + c]}; }
  constexpr Vec3 row(int r) const { return {a[r * 3], a[r * 3 + 1], a[r * 3 + 2]}; }
  constexpr void set_col(int c, const Vec3& v) { a[c] = v.x; a[3 + c] = v.y; a[6 + c] = v.z; }

  constexpr double trace() const { return a[0] + a[4] + a[8]; }
  constexpr double det() const {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }
  constexpr Mat3 transpose() const {
    return Mat3{{a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]}};
  }
  // Adjugate-based inverse; caller guarantees det != 0.
  constexpr Mat3 inverse() const {
    const double d = det();
    Mat3 r;
    r.a[0] = (a[4] * a[8] - a[5] * a[7]) / d;
    r.a[1] = (a[2] * a[7] - a[1] * a[8]) / d;
    r.a[2] = (a[1] * a[5] - a[2] * a[4]) / d;
    r.a[3] = (a[5] * a[6] - a[3] * a[8]) / d;
    r.a[4] = (a[0] * a[8] - a[2] * a[6]) / d;
    r.a[5] = (a[2] * a[3] - a[0] * a[5]) / d;
    r.a[6] = (a[3] * a[7] - a[4] * a[6]) / d;
    r.a[7] = (a[1] * a[6] - a[0] * a[7]) / d;
    r.a[8] = (a[0] * a[4] - a[1] * a[3]) / d;
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::fmax(m, std::fabs(v));
    return m;
  }

  constexpr Mat3& operator+=(const Mat3& o) { for (int i = 0; i < 9; ++i) a[i] += o.a[i]; return *this; }
  constexpr Mat3& operator-=(const Mat3& o) { for (int i = 0; i < 9; ++i) a[i] -= o.a[i]; return *this; }
  constexpr Mat3& operator*=(double s) { for (double& v : a) v *= s; return *this; }

  friend constexpr Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
  friend constexpr Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
  friend constexpr Mat3 operator*(Mat3 x, double s) { return x *= s; }
  friend constexpr Mat3 operator*(double s, Mat3 x) { return x *= s; }
  friend constexpr Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r.a[i * 3 + j] = x.a[i * 3] * y.a[j] + x.a[i * 3 + 1] * y.a[3 + j] + x.a[i * 3 + 2] * y.a[6 + j];
    return r;
  }
  friend constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
    return {m.a[0] * v.x + m.a[1] * v.y + m.a[2] * v.z, m.a[3] * v.x + m.a[4] * v.y + m.a[5] * v.z,
            m.a[6] * v.x + m.a[7] * v.y + m.a[8] * v.z};
  }
  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

// Integer 3x3 matrix, row-major.
struct IMat3 {
  std::array<std::int64_t, 9> a{};

  static constexpr IMat3 identity() { return IMat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

  constexpr std::int64_t operator()(int r, int c) const { return a[r * 3 + c]; }
  constexpr std::int64_t& operator()(int r, int c) { return a[r * 3 + c]; }

  constexpr IVec3 col(int c) const { return {a[c], a[3 + c], a[6 + c]}; }
  constexpr void set_col(int c, const IVec3& v) { a[c] = v.x; a[3 + c] = v.y; a[6 + c] = v.z; }

  constexpr std::int64_t det() const {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }
  // Exact inverse for unimodular matrices (det == 1).
  constexpr IMat3 unimodular_inverse() const {
    IMat3 r;
    r.a[0] = a[4] * a[8] - a[5] * a[7];
    r.a[1] = a[2] * a[7] - a[1] * a[8];
    r.a[2] = a[1] * a[5] - a[2] * a[4];
    r.a[3] = a[5] * a[6] - a[3] * a[8];
    r.a[4] = a[0] * a[8] - a[2] * a[6];
    r.a[5] = a[2] * a[3] - a[0] * a[5];
    r.a[6] = a[3] * a[7] - a[4] * a[6];
    r.a[7] = a[1] * a[6] - a[0] * a[7];
    r.a[8] = a[0] * a[4] - a[1] * a[3];
    return r;
  }
  Mat3 to_real() const {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = static_cast<double>(a[i]);
    return m;
  }

  friend constexpr IMat3 operator*(const IMat3& x, const IMat3& y) {
    IMat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r.a[i * 3 + j] = x.a[i * 3] * y.a[j] + x.a[i * 3 + 1] * y.a[3 + j] + x.a[i * 3 + 2] * y.a[6 + j];
    return r;
  }
  friend constexpr IVec3 operator*(const IMat3& m, const IVec3& v) {
    return {m.a[0] * v.x + m.a[1] * v.y + m.a[2] * v.z, m.a[3] * v.x + m.a[4] * v.y + m.a[5] * v.z,
            m.a[6] * v.x + m.a[7] * v.y + m.a[8] * v.z};
  }
  friend constexpr bool operator==(const IMat3&, const IMat3&) = default;
};

// Floor-based modulo with result in [0, m) for m > 0.
inline double floor_mod(double x, double m) {
  double r = x - std::floor(x / m) * m;
  if (r >= m) r -= m;
  if (r < 0.0) r = 0.0;
  return r;
}

// Symmetric 3x3 eigen-decomposition (cyclic Jacobi). Returns eigenvalues in
// ascending order; columns of `vectors` are the matching unit eigenvectors.
struct SymEigen {
  Vec3 values;
  Mat3 vectors;
};
SymEigen symmetric_eigen(const Mat3& s);

}  // namespace flowcell
