#pragma once

#include <array>
#include <cmath>

namespace se3net {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

// Rigid motion: axis-angle rotation (direction = axis, norm = angle in
// radians) plus a translation in meters.
struct RigidTransform {
  Vec3 rotation{0.0, 0.0, 0.0};
  Vec3 translation{0.0, 0.0, 0.0};
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 vadd(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 vsub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 vscale(const Vec3& a, double s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  return n > 0.0 ? vscale(a, 1.0 / n) : a;
}

inline Mat3 identity_mat() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

inline Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      c[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] +
                     a[3 * i + 2] * b[6 + j];
  return c;
}

inline Mat3 mat_transpose(const Mat3& a) {
  return {a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]};
}

inline Vec3 mat_vec(const Mat3& m, const Vec3& x) {
  return {m[0] * x[0] + m[1] * x[1] + m[2] * x[2],
          m[3] * x[0] + m[4] * x[1] + m[5] * x[2],
          m[6] * x[0] + m[7] * x[1] + m[8] * x[2]};
}

inline Mat3 skew(const Vec3& a) {
  return {0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0};
}

// x' = R x + t. Shared by the generator, the transform layer and the
// tests so exact-equality checks compare identical arithmetic.
inline Vec3 apply_rt(const Mat3& R, const Vec3& t, const Vec3& x) {
  return {R[0] * x[0] + R[1] * x[1] + R[2] * x[2] + t[0],
          R[3] * x[0] + R[4] * x[1] + R[5] * x[2] + t[1],
          R[6] * x[0] + R[7] * x[1] + R[8] * x[2] + t[2]};
}

// Rodrigues map from axis-angle to a rotation matrix. Throws
// std::domain_error on non-finite input.
Mat3 exp_map(const Vec3& axis_angle);

// exp_map plus the 27 partials dR(r,c)/da_k; R matches exp_map bit for bit.
void exp_map_jacobian(const Vec3& axis_angle, Mat3& R,
                      std::array<Mat3, 3>& dR);

// Inverse of exp_map with the angle in [0, pi].
Vec3 log_map(const Mat3& R);

Vec3 apply(const RigidTransform& T, const Vec3& x);

// apply(compose(T1,T2), x) == apply(T1, apply(T2, x))
RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2);
RigidTransform invert(const RigidTransform& t);

inline bool is_identity(const RigidTransform& t, double tol = 1e-12) {
  return norm(t.rotation) + norm(t.translation) <= tol;
}

}  // namespace se3net
