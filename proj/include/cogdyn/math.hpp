#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cogdyn {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

inline Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

// Reads the axial vector from the lower/upper entries as written, so it is
// well defined (if lossy) for matrices that are not exactly skew.
inline Vec3 vee(const Mat3& S) { return {S(2, 1), S(0, 2), S(1, 0)}; }

// Sum of the first two diagonal entries; encodes the thin-disc inertia.
inline double trace2(const Mat3& A) { return A(0, 0) + A(1, 1); }

inline Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 R;
  R << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return R;
}

inline Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 R;
  R << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return R;
}

}  // namespace cogdyn
