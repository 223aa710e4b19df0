#include "pcc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pcc {

Vec3 unit_or_zero(const Vec3& v, double eps) {
  const double n = v.norm();
  if (n < eps) return Vec3::Zero();
  return v / n;
}

double bond_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = (a - b).normalized();
  const Vec3 w = (c - b).normalized();
  const double d = std::clamp(u.dot(w), -1.0, 1.0);
  return std::acos(d);
}

double dihedral(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 b1 = b - a;
  const Vec3 b2 = c - b;
  const Vec3 b3 = d - c;
  const Vec3 n1 = b1.cross(b2);
  const Vec3 n2 = b2.cross(b3);
  return std::atan2(n1.cross(n2).dot(b2.normalized()), n1.dot(n2));
}

Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double length,
                double angle, double torsion) {
  const Vec3 bc = (c - b).normalized();
  Vec3 n = (b - a).cross(bc);
  const double nn = n.norm();
  if (nn < kDegenEps) {
    // Predecessors collinear: any normal completes the frame.
    n = bc.cross(Vec3::UnitX());
    if (n.norm() < kDegenEps) n = bc.cross(Vec3::UnitY());
    n.normalize();
  } else {
    n /= nn;
  }
  const Vec3 m = n.cross(bc);
  const Vec3 d2(-length * std::cos(angle), length * std::sin(angle) * std::cos(torsion),
                length * std::sin(angle) * std::sin(torsion));
  return c + bc * d2.x() + m * d2.y() + n * d2.z();
}

Eigen::VectorXd positional_encoding(double index, int dim) {
  if (dim <= 0 || dim % 2 != 0)
    throw OddDim("positional encoding needs a positive even width, got " +
                 std::to_string(dim));
  Eigen::VectorXd out(dim);
  for (int m = 0; m < dim / 2; ++m) {
    const double rate = std::pow(10000.0, 2.0 * m / dim);
    out[2 * m] = std::sin(index / rate);
    out[2 * m + 1] = std::cos(index / rate);
  }
  return out;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from 0 so the log stays finite.
  double u = uniform();
  if (u < 1e-300) u = 1e-300;
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double theta = 2.0 * M_PI * v;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Mat3 Rng::rotation() {
  double q[4];
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : q) {
      x = normal();
      norm2 += x * x;
    }
  } while (norm2 < 1e-12);
  const double s = 1.0 / std::sqrt(norm2);
  const double w = q[0] * s, x = q[1] * s, y = q[2] * s, z = q[3] * s;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace pcc
