#pragma once

#include <cmath>
#include <random>
#include <string>

#include "translift/common.hpp"

namespace translift {

enum class GroupId { SO2, SO3, U1, GLn };

inline std::string to_string(GroupId id) {
  switch (id) {
    case GroupId::SO2: return "SO2";
    case GroupId::SO3: return "SO3";
    case GroupId::U1: return "U1";
    case GroupId::GLn: return "GLn";
  }
  return "?";
}

// Rotation by `angle` about `axis` (Rodrigues formula).
inline Mat rotation3(const Vec& axis, double angle) {
  Vec u = axis;
  const double n = u.norm();
  if (n < 1e-14) throw model_error("rotation3: zero axis");
  u /= n;
  Mat k = Mat::Zero(3, 3);
  k(0, 1) = -u[2]; k(0, 2) = u[1];
  k(1, 0) = u[2];  k(1, 2) = -u[0];
  k(2, 0) = -u[1]; k(2, 1) = u[0];
  return Mat(Mat::Identity(3, 3) + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k));
}

inline Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

// Matrix group with its operations and the bi-invariant distance used for
// residual reporting. U1 is modelled as 2x2 plane rotations so that complex
// phases stay inside the one real-matrix representation used everywhere.
struct GroupModel {
  GroupId id = GroupId::SO2;
  int n = 2;

  static GroupModel so2() { return {GroupId::SO2, 2}; }
  static GroupModel so3() { return {GroupId::SO3, 3}; }
  static GroupModel u1() { return {GroupId::U1, 2}; }
  static GroupModel gl(int n) {
    if (n < 1) throw model_error("GL(n): n must be positive");
    return {GroupId::GLn, n};
  }

  bool rotation_like() const { return id != GroupId::GLn; }

  Mat identity() const { return Mat::Identity(n, n); }
  Mat multiply(const Mat& a, const Mat& b) const { return a * b; }

  Mat invert(const Mat& a) const {
    if (rotation_like()) return a.transpose();
    const double det = a.determinant();
    if (std::abs(det) < 1e-12) throw model_error("GL(n): element not invertible");
    return a.inverse();
  }

  double distance(const Mat& a, const Mat& b) const { return (a - b).norm(); }

  // Deviation from the defining constraints: orthogonality + unit
  // determinant for the rotation groups, invertibility for GL(n).
  double constraint_residual(const Mat& a) const {
    if (rotation_like())
      return (a.transpose() * a - Mat::Identity(n, n)).norm() + std::abs(a.determinant() - 1.0);
    return std::abs(a.determinant()) < 1e-12 ? 1.0 : 0.0;
  }

  // Nearest group element (polar projection for rotations).
  Mat project(const Mat& a) const {
    if (!rotation_like()) return a;
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat u = svd.matrixU(), v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(n - 1) *= -1.0;
    return Mat(u * v.transpose());
  }

  // Reprojects once numerical drift passes the tolerance; identity otherwise.
  Mat stabilize(const Mat& a) const {
    if (rotation_like() && constraint_residual(a) > kGroupDriftTol) return project(a);
    return a;
  }

  // One-parameter rotation subgroup: plane rotation for SO2/U1, rotation
  // about the z axis for SO3.
  Mat rotation(double angle) const {
    switch (id) {
      case GroupId::SO2:
      case GroupId::U1: return rotation2(angle);
      case GroupId::SO3: return rotation3(make_vec({0.0, 0.0, 1.0}), angle);
      case GroupId::GLn: throw model_error("GL(n): no canonical rotation subgroup");
    }
    return identity();
  }

  Mat random_element(std::mt19937& rng) const {
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::normal_distribution<double> gauss(0.0, 1.0);
    switch (id) {
      case GroupId::SO2:
      case GroupId::U1: return rotation2(angle(rng));
      case GroupId::SO3: {
        Mat g(3, 3);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) g(i, j) = gauss(rng);
        return project(g);
      }
      case GroupId::GLn: {
        for (;;) {
          Mat g = Mat::Identity(n, n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) += 0.4 * gauss(rng);
          if (std::abs(g.determinant()) > 0.1) return g;
        }
      }
    }
    return identity();
  }
};

}  // namespace translift
