#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "pcc/errors.hpp"

namespace pcc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDegenEps = 1e-8;

// Unit vector with a zero guard: inputs shorter than eps map to zero.
Vec3 unit_or_zero(const Vec3& v, double eps = kDegenEps);

// Interior angle at b formed by a and c, in [0, pi].
double bond_angle(const Vec3& a, const Vec3& b, const Vec3& c);

// Signed torsion about the b-c axis, in (-pi, pi]; 0 = cis.
double dihedral(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Position of the fourth atom given three predecessors, a bond length,
// a bond angle at c, and a torsion about (b, c).
Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double length,
                double angle, double torsion);

// Interleaved sinusoid: out[2m] = sin(index / 10000^(2m/dim)), out[2m+1] = cos.
// The index may be any nonnegative real (residue position or a distance).
Eigen::VectorXd positional_encoding(double index, int dim);

// Deterministic PRNG. All draws go through explicit conversions so sequences
// are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [lo, hi] inclusive
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  double normal();

  Vec3 vec3(double lo, double hi) {
    const double x = uniform(lo, hi), y = uniform(lo, hi), z = uniform(lo, hi);
    return {x, y, z};
  }

  // Uniform over SO(3) via a normalized quaternion.
  Mat3 rotation();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pcc
