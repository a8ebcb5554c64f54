#include "se3net/se3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace se3net {

namespace {

// Coefficients of R = I + f1*W + f2*W^2 with W = skew(a), theta = |a|.
// Below 1e-8 the closed forms hit 0/0, so a 4-term series takes over;
// at the switch both branches agree to ~1e-16 per entry.
void rot_coeffs(double theta_sq, double& f1, double& f2) {
  if (theta_sq < 1e-16) {  // theta < 1e-8
    f1 = 1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0 -
         theta_sq * theta_sq * theta_sq / 5040.0;
    f2 = 0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0 -
         theta_sq * theta_sq * theta_sq / 40320.0;
  } else {
    double theta = std::sqrt(theta_sq);
    f1 = std::sin(theta) / theta;
    f2 = (1.0 - std::cos(theta)) / theta_sq;
  }
}

// d f1/d a_k = g1 * a_k, d f2/d a_k = g2 * a_k. The closed forms lose all
// precision for small angles; their contribution is suppressed by theta^3
// above the switch, so a wider series region is safe.
void rot_coeff_derivs(double theta_sq, double& g1, double& g2) {
  if (theta_sq < 1e-8) {  // theta < 1e-4
    g1 = -1.0 / 3.0 + theta_sq / 30.0 - theta_sq * theta_sq / 840.0 +
         theta_sq * theta_sq * theta_sq / 45360.0;
    g2 = -1.0 / 12.0 + theta_sq / 180.0 - theta_sq * theta_sq / 6720.0 +
         theta_sq * theta_sq * theta_sq / 453600.0;
  } else {
    double theta = std::sqrt(theta_sq);
    double s = std::sin(theta), c = std::cos(theta);
    g1 = (theta * c - s) / (theta_sq * theta);
    g2 = (theta * s - 2.0 * (1.0 - c)) / (theta_sq * theta_sq);
  }
}

void check_finite(const Vec3& a) {
  if (!std::isfinite(a[0]) || !std::isfinite(a[1]) || !std::isfinite(a[2]))
    throw std::domain_error("exp_map: non-finite axis-angle input");
}

Mat3 mat_add(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 9; ++i) c[i] = a[i] + b[i];
  return c;
}

Mat3 mat_scale(const Mat3& a, double s) {
  Mat3 c;
  for (int i = 0; i < 9; ++i) c[i] = a[i] * s;
  return c;
}

}  // namespace

Mat3 exp_map(const Vec3& a) {
  check_finite(a);
  double theta_sq = dot(a, a);
  double f1, f2;
  rot_coeffs(theta_sq, f1, f2);
  Mat3 W = skew(a);
  Mat3 W2 = mat_mul(W, W);
  Mat3 R = identity_mat();
  for (int i = 0; i < 9; ++i) R[i] += f1 * W[i] + f2 * W2[i];
  return R;
}

void exp_map_jacobian(const Vec3& a, Mat3& R, std::array<Mat3, 3>& dR) {
  check_finite(a);
  double theta_sq = dot(a, a);
  double f1, f2, g1, g2;
  rot_coeffs(theta_sq, f1, f2);
  rot_coeff_derivs(theta_sq, g1, g2);
  Mat3 W = skew(a);
  Mat3 W2 = mat_mul(W, W);
  R = identity_mat();
  for (int i = 0; i < 9; ++i) R[i] += f1 * W[i] + f2 * W2[i];
  for (int k = 0; k < 3; ++k) {
    Vec3 ek{0, 0, 0};
    ek[k] = 1.0;
    Mat3 Ek = skew(ek);
    Mat3 EW = mat_mul(Ek, W);
    Mat3 WE = mat_mul(W, Ek);
    dR[k] = mat_add(mat_add(mat_scale(W, g1 * a[k]), mat_scale(Ek, f1)),
                    mat_add(mat_scale(W2, g2 * a[k]),
                            mat_scale(mat_add(EW, WE), f2)));
  }
}

Vec3 log_map(const Mat3& R) {
  double tr = std::clamp((R[0] + R[4] + R[8] - 1.0) * 0.5, -1.0, 1.0);
  double theta = std::acos(tr);
  Vec3 v{(R[7] - R[5]) * 0.5, (R[2] - R[6]) * 0.5, (R[3] - R[1]) * 0.5};
  if (theta < 1e-5) {
    // v = sin(theta) * axis; scale by theta/sin(theta) ~ 1 + theta^2/6
    return vscale(v, 1.0 + theta * theta / 6.0);
  }
  if (theta > 3.1315926535897933) {  // pi - 1e-2
    // Near pi: recover the axis from the symmetric part, sign from v.
    Vec3 n;
    double one_minus_c = 1.0 - tr;
    Vec3 diag{(R[0] - tr) / one_minus_c, (R[4] - tr) / one_minus_c,
              (R[8] - tr) / one_minus_c};
    int i = 0;
    if (diag[1] > diag[i]) i = 1;
    if (diag[2] > diag[i]) i = 2;
    n[i] = std::sqrt(std::max(0.0, diag[i]));
    int j = (i + 1) % 3, l = (i + 2) % 3;
    double bij = 0.5 * (R[3 * i + j] + R[3 * j + i]);
    double bil = 0.5 * (R[3 * i + l] + R[3 * l + i]);
    n[j] = bij / (n[i] * one_minus_c);
    n[l] = bil / (n[i] * one_minus_c);
    if (v[i] < 0.0) n = vscale(n, -1.0);
    return vscale(normalized(n), theta);
  }
  return vscale(v, theta / std::sin(theta));
}

Vec3 apply(const RigidTransform& T, const Vec3& x) {
  Mat3 R = exp_map(T.rotation);
  return apply_rt(R, T.translation, x);
}

RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2) {
  Mat3 r1 = exp_map(t1.rotation);
  Mat3 r2 = exp_map(t2.rotation);
  RigidTransform out;
  out.rotation = log_map(mat_mul(r1, r2));
  out.translation = vadd(mat_vec(r1, t2.translation), t1.translation);
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  // exp(-a) = exp(a)^T, so the axis-angle inverse is exact.
  RigidTransform out;
  out.rotation = vscale(t.rotation, -1.0);
  Mat3 rt = mat_transpose(exp_map(t.rotation));
  out.translation = vscale(mat_vec(rt, t.translation), -1.0);
  return out;
}

}  // namespace se3net
