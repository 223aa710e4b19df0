#include "pcc/fixtures.hpp"

#include <cmath>

namespace pcc {

namespace {

constexpr double kDeg = M_PI / 180.0;

// Ideal backbone geometry, Angstrom / degrees.
constexpr double kNCa = 1.458, kCaC = 1.525, kCN = 1.329, kCO = 1.231;
constexpr double kAngNCaC = 111.2 * kDeg;
constexpr double kAngCaCN = 116.2 * kDeg;
constexpr double kAngCNCa = 121.7 * kDeg;
constexpr double kAngCaCO = 120.8 * kDeg;
constexpr double kOmega = 180.0 * kDeg;

// Rigid placement of the hairpin return strand relative to the first strand:
// point reflection of (x, y) about (kPairSx, kPairSy)/2 (a proper 180-degree
// rotation about a z-parallel axis) plus a z shift. Tuned once by sweeping
// for maximal cross-strand H-bond coverage; frozen thereafter.
constexpr double kPairSxOff = 1.4;
constexpr double kPairSyOff = 4.3;
constexpr double kPairDz = 0.75;

struct PlacedResidue {
  Vec3 n, ca, c, o;
};

std::vector<PlacedResidue> grow(const std::vector<std::array<double, 2>>& phipsi) {
  std::vector<PlacedResidue> out(phipsi.size());
  if (phipsi.empty()) return out;

  out[0].n = Vec3::Zero();
  out[0].ca = Vec3(kNCa, 0, 0);
  out[0].c = out[0].ca + kCaC * Vec3(-std::cos(kAngNCaC), std::sin(kAngNCaC), 0);

  for (size_t i = 1; i < phipsi.size(); ++i) {
    const double psi_prev = phipsi[i - 1][1];
    const double phi = phipsi[i][0];
    out[i].n = place_atom(out[i - 1].n, out[i - 1].ca, out[i - 1].c, kCN,
                          kAngCaCN, psi_prev);
    out[i].ca = place_atom(out[i - 1].ca, out[i - 1].c, out[i].n, kNCa,
                           kAngCNCa, kOmega);
    out[i].c = place_atom(out[i - 1].c, out[i].n, out[i].ca, kCaC, kAngNCaC, phi);
  }
  for (size_t i = 0; i < phipsi.size(); ++i)
    out[i].o = place_atom(out[i].n, out[i].ca, out[i].c, kCO, kAngCaCO,
                          phipsi[i][1] + M_PI);
  return out;
}

std::vector<std::array<double, 2>> repeat_torsions(int n, double phi, double psi) {
  return std::vector<std::array<double, 2>>(
      static_cast<size_t>(n), {phi * kDeg, psi * kDeg});
}

ProteinStructure from_placed(const std::vector<PlacedResidue>& placed, char aa,
                             const std::string& chain_id) {
  ProteinStructure s;
  s.source_id = "synthetic";
  const int code = aa_index_from_char(aa);
  for (size_t i = 0; i < placed.size(); ++i) {
    Residue r;
    r.chain_id = chain_id;
    r.chain_index = 0;
    r.seq_index = static_cast<int>(i);
    r.auth_seq = static_cast<int>(i) + 1;
    r.aa = code;
    r.n = placed[i].n;
    r.ca = placed[i].ca;
    r.c = placed[i].c;
    r.o = placed[i].o;
    r.has_n = r.has_ca = r.has_c = r.has_o = true;
    s.residues.push_back(std::move(r));
  }
  return s;
}

Vec3 pair_image(const Vec3& p, double sx, double sy, double dz) {
  return {sx - p.x(), sy - p.y(), p.z() + dz};
}

// Return-strand placement for a given first strand.
void pair_params(const ProteinStructure& strand, double& sx, double& sy,
                 double& dz) {
  double min_x = strand.residues.front().ca.x(), max_x = min_x, mean_y = 0;
  for (const auto& r : strand.residues) {
    min_x = std::min(min_x, r.ca.x());
    max_x = std::max(max_x, r.ca.x());
    mean_y += r.ca.y();
  }
  mean_y /= strand.size();
  sx = min_x + max_x + kPairSxOff;
  sy = 2 * mean_y + kPairSyOff;
  dz = kPairDz;
}

}  // namespace

ProteinStructure make_chain(const std::vector<std::array<double, 2>>& phipsi,
                            char aa, const std::string& chain_id) {
  return from_placed(grow(phipsi), aa, chain_id);
}

ProteinStructure make_helix(int n, char aa) {
  return make_chain(repeat_torsions(n, -57, -47), aa);
}

ProteinStructure make_strand(int n, char aa) {
  return make_chain(repeat_torsions(n, -139, 135), aa);
}

ProteinStructure make_coil(int n, Rng& rng) {
  std::vector<std::array<double, 2>> tors(static_cast<size_t>(n));
  for (auto& t : tors) {
    t[0] = rng.uniform(-160.0, -50.0) * kDeg;
    t[1] = rng.uniform(-60.0, 170.0) * kDeg;
  }
  return from_placed(grow(tors), 'A', "A");
}

ProteinStructure make_mixed(int n, Rng& rng) {
  std::vector<std::array<double, 2>> tors;
  tors.reserve(static_cast<size_t>(n));
  while (static_cast<int>(tors.size()) < n) {
    const int kind = static_cast<int>(rng.uniform_int(0, 2));
    const int len = static_cast<int>(
        kind == 0 ? rng.uniform_int(6, 12)
                  : kind == 1 ? rng.uniform_int(5, 9) : rng.uniform_int(3, 6));
    for (int i = 0; i < len && static_cast<int>(tors.size()) < n; ++i) {
      double phi, psi;
      if (kind == 0) {
        phi = -57 + rng.uniform(-5, 5);
        psi = -47 + rng.uniform(-5, 5);
      } else if (kind == 1) {
        phi = -139 + rng.uniform(-5, 5);
        psi = 135 + rng.uniform(-5, 5);
      } else {
        phi = rng.uniform(-160, -50);
        psi = rng.uniform(-60, 170);
      }
      tors.push_back({phi * kDeg, psi * kDeg});
    }
  }
  ProteinStructure s = from_placed(grow(tors), 'A', "A");
  // Vary residue identities so sequence-dependent features are exercised.
  for (auto& r : s.residues) r.aa = static_cast<int>(rng.uniform_int(0, 19));
  return s;
}

ProteinStructure make_hairpin(int per_strand, int loop_len) {
  ProteinStructure first = make_strand(per_strand);
  double sx, sy, dz;
  pair_params(first, sx, sy, dz);

  ProteinStructure s = first;
  const Residue& a_end = first.residues.back();
  const Residue& b_front = first.residues.front();
  const auto img = [&](const Vec3& p) { return pair_image(p, sx, sy, dz); };

  auto push = [&](const Residue& base, const Vec3& n, const Vec3& ca,
                  const Vec3& c, const Vec3& o) {
    Residue r = base;
    r.seq_index = s.size();
    r.auth_seq = s.size() + 1;
    r.n = n;
    r.ca = ca;
    r.c = c;
    r.o = o;
    s.residues.push_back(std::move(r));
  };

  // Loop backbone interpolated between the strand end and the return start.
  for (int k = 1; k <= loop_len; ++k) {
    const double t = static_cast<double>(k) / (loop_len + 1);
    const auto lerp = [&](const Vec3& a, const Vec3& b) {
      return (1 - t) * a + t * b;
    };
    push(a_end, lerp(a_end.n, img(b_front.n)), lerp(a_end.ca, img(b_front.ca)),
         lerp(a_end.c, img(b_front.c)), lerp(a_end.o, img(b_front.o)));
  }
  for (const auto& r : first.residues)
    push(r, img(r.n), img(r.ca), img(r.c), img(r.o));
  return s;
}

ProteinStructure make_strand_pair(int per_strand) {
  ProteinStructure first = make_strand(per_strand);
  double sx, sy, dz;
  pair_params(first, sx, sy, dz);
  ProteinStructure second = first;
  for (auto& r : second.residues) {
    r.n = pair_image(r.n, sx, sy, dz);
    r.ca = pair_image(r.ca, sx, sy, dz);
    r.c = pair_image(r.c, sx, sy, dz);
    r.o = pair_image(r.o, sx, sy, dz);
  }
  return concat_chains({first, second});
}

ProteinStructure concat_chains(const std::vector<ProteinStructure>& parts) {
  ProteinStructure s;
  s.source_id = "synthetic";
  int chain = 0;
  for (const auto& part : parts) {
    const std::string id(1, static_cast<char>('A' + chain));
    for (const auto& base : part.residues) {
      Residue r = base;
      r.chain_id = id;
      r.chain_index = chain;
      s.residues.push_back(std::move(r));
    }
    ++chain;
  }
  return s;
}

ProteinStructure transformed(const ProteinStructure& s, const Mat3& r,
                             const Vec3& t) {
  ProteinStructure out = s;
  for (auto& res : out.residues) {
    res.n = r * res.n + t;
    res.ca = r * res.ca + t;
    res.c = r * res.c + t;
    res.o = r * res.o + t;
  }
  return out;
}

ProteinStructure mirrored_x(const ProteinStructure& s) {
  ProteinStructure out = s;
  for (auto& res : out.residues) {
    res.n.x() = -res.n.x();
    res.ca.x() = -res.ca.x();
    res.c.x() = -res.c.x();
    res.o.x() = -res.o.x();
  }
  return out;
}

}  // namespace pcc
