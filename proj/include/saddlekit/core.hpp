#pragma once

// Small vector types, tolerance constants and index utilities shared by every
// saddlekit header. Everything here is plain value-semantics C++20.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace saddlekit {

inline constexpr double kPi = 3.14159265358979323846;

// Geometric coincidence tolerance (absolute, domain units).
inline constexpr double kTolGeom = 1e-9;
// Snapping tolerance for exact-style predicates (point-on-line etc.).
inline constexpr double kSnap = 1e-12;

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

  [[nodiscard]] double dot(Vec2 o) const { return x * o.x + y * o.y; }
  [[nodiscard]] double cross(Vec2 o) const { return x * o.y - y * o.x; }
  [[nodiscard]] double norm2() const { return x * x + y * y; }
  [[nodiscard]] double norm() const { return std::sqrt(norm2()); }
  [[nodiscard]] Vec2 perp() const { return {-y, x}; }
  [[nodiscard]] Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(Vec3 o) { x += o.x; y += o.y; z += o.z; return *this; }

  [[nodiscard]] double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  [[nodiscard]] Vec3 cross(Vec3 o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  [[nodiscard]] double norm2() const { return x * x + y * y + z * z; }
  [[nodiscard]] double norm() const { return std::sqrt(norm2()); }
  [[nodiscard]] Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
  [[nodiscard]] Vec2 xy() const { return {x, y}; }
};

inline Vec3 operator*(double s, Vec3 v) { return v * s; }

// free-function spellings of the vector products
inline double dot(Vec2 a, Vec2 b) { return a.dot(b); }
inline double cross(Vec2 a, Vec2 b) { return a.cross(b); }
inline double dot(Vec3 a, Vec3 b) { return a.dot(b); }
inline Vec3 cross(Vec3 a, Vec3 b) { return a.cross(b); }

// Axis-aligned boxes; used for witness bounding boxes and overlap pruning.
struct BBox2 {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void expand(Vec2 p) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
  }
  [[nodiscard]] bool valid() const { return lo.x <= hi.x; }
  [[nodiscard]] bool overlaps(const BBox2& o, double pad = 0.0) const {
    return lo.x <= o.hi.x + pad && o.lo.x <= hi.x + pad &&
           lo.y <= o.hi.y + pad && o.lo.y <= hi.y + pad;
  }
  [[nodiscard]] Vec2 extent() const { return valid() ? hi - lo : Vec2{0, 0}; }
};

struct BBox3 {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(Vec3 p) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
  [[nodiscard]] bool valid() const { return lo.x <= hi.x; }
  [[nodiscard]] double diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }
};

// Disjoint-set forest with path compression; cut/fiber component labelling
// leans on this everywhere.
class UnionFind {
 public:
  explicit UnionFind(int n = 0) { reset(n); }
  void reset(int n) {
    parent_.resize(static_cast<size_t>(n));
    std::iota(parent_.begin(), parent_.end(), 0);
    rank_.assign(static_cast<size_t>(n), 0);
  }
  int find(int a) {
    while (parent_[static_cast<size_t>(a)] != a) {
      parent_[static_cast<size_t>(a)] = parent_[static_cast<size_t>(parent_[static_cast<size_t>(a)])];
      a = parent_[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a); b = find(b);
    if (a == b) return;
    if (rank_[static_cast<size_t>(a)] < rank_[static_cast<size_t>(b)]) std::swap(a, b);
    parent_[static_cast<size_t>(b)] = a;
    if (rank_[static_cast<size_t>(a)] == rank_[static_cast<size_t>(b)]) rank_[static_cast<size_t>(a)]++;
  }
  [[nodiscard]] int size() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

// Deterministic RNG wrapper. Every randomized sweep in the library threads a
// seed through one of these so runs are reproducible bit-for-bit.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(gen);
  }
  int index(int n) {
    std::uniform_int_distribution<int> d(0, n - 1);
    return d(gen);
  }
};

// Low-discrepancy direction sequences (golden-angle / spherical Fibonacci).
inline Vec2 quasi_dir_2d(int k) {
  double a = 2.0 * kPi * std::fmod(0.6180339887498949 * (k + 1), 1.0);
  return {std::cos(a), std::sin(a)};
}

inline Vec3 fibonacci_sphere_dir(int k, int n) {
  double golden = kPi * (3.0 - std::sqrt(5.0));
  double z = 1.0 - 2.0 * (k + 0.5) / n;
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  double a = golden * k;
  return {r * std::cos(a), r * std::sin(a), z};
}

inline double wrap_angle(double theta, double period) {
  double t = std::fmod(theta, period);
  if (t < 0) t += period;
  return t;
}

// Signed wrap into (-period/2, period/2].
inline double wrap_signed(double theta, double period) {
  double t = std::fmod(theta, period);
  if (t <= -period / 2) t += period;
  if (t > period / 2) t -= period;
  return t;
}

}  // namespace saddlekit
