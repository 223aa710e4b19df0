#include "pcc/sse.hpp"

#include <cmath>

namespace pcc {

namespace {

constexpr double kHbondCutoff = -0.5;
constexpr double kClampEnergy = -9.9;
constexpr double kMinDist = 0.5;
constexpr double kCoupling = 0.084 * 332.0;
constexpr int kProline = 12;  // index of P in the residue alphabet

}  // namespace

double hbond_energy(const Vec3& c_acc, const Vec3& o_acc, const Vec3& n_don,
                    const Vec3& h_don) {
  const double r_on = (o_acc - n_don).norm();
  const double r_ch = (c_acc - h_don).norm();
  const double r_oh = (o_acc - h_don).norm();
  const double r_cn = (c_acc - n_don).norm();
  if (r_on < kMinDist || r_ch < kMinDist || r_oh < kMinDist || r_cn < kMinDist)
    return kClampEnergy;
  return kCoupling * (1.0 / r_on + 1.0 / r_ch - 1.0 / r_oh - 1.0 / r_cn);
}

std::vector<std::optional<Vec3>> infer_amide_hydrogens(const ProteinStructure& s) {
  std::vector<std::optional<Vec3>> h(s.residues.size());
  for (int i = 0; i < s.size(); ++i) {
    if (!s.has_prev(i)) continue;
    const Residue& prev = s.residues[i - 1];
    const Residue& cur = s.residues[i];
    if (!cur.has_n || !prev.has_c || !prev.has_o) continue;
    const Vec3 dir = unit_or_zero(prev.c - prev.o);
    if (dir.isZero()) continue;
    h[i] = cur.n + 1.01 * dir;
  }
  return h;
}

std::string assign_sse3(const ProteinStructure& s) {
  const int n = s.size();
  std::string labels(static_cast<size_t>(n), 'C');
  if (n < 5) return labels;

  const auto hydrogens = infer_amide_hydrogens(s);

  auto can_accept = [&](int i) {
    return s.residues[i].has_c && s.residues[i].has_o;
  };
  auto can_donate = [&](int j) {
    return s.residues[j].has_n && hydrogens[j].has_value() &&
           s.residues[j].aa != kProline;
  };
  // bond(i, j): C=O of i accepts the N-H of j.
  auto bonded = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= n || j >= n) return false;
    if (s.same_chain(i, j) && std::abs(i - j) < 2) return false;
    if (!can_accept(i) || !can_donate(j)) return false;
    return hbond_energy(s.residues[i].c, s.residues[i].o, s.residues[j].n,
                        *hydrogens[j]) < kHbondCutoff;
  };

  // n-turns: C=O of i bonds the N-H of i+len within one chain.
  auto turn = [&](int i, int len) {
    return i + len < n && s.same_chain(i, i + len) && bonded(i, i + len);
  };

  std::vector<bool> helix4(n, false), helix35(n, false), bridge(n, false);
  for (int i = 1; i < n; ++i) {
    if (turn(i - 1, 4) && turn(i, 4))
      for (int k = i; k <= i + 3; ++k) helix4[k] = true;
    if (turn(i - 1, 3) && turn(i, 3))
      for (int k = i; k <= i + 2; ++k) helix35[k] = true;
    if (turn(i - 1, 5) && turn(i, 5))
      for (int k = i; k <= i + 4; ++k) helix35[k] = true;
  }

  // Chain-local neighbors for the bridge patterns.
  auto prev_in_chain = [&](int i) { return s.has_prev(i) ? i - 1 : -1; };
  auto next_in_chain = [&](int i) { return s.has_next(i) ? i + 1 : -1; };

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (s.same_chain(i, j) && j - i < 3) continue;
      const int im = prev_in_chain(i), ip = next_in_chain(i);
      const int jm = prev_in_chain(j), jp = next_in_chain(j);
      const bool parallel = (im >= 0 && ip >= 0 && bonded(im, j) && bonded(j, ip)) ||
                            (jm >= 0 && jp >= 0 && bonded(jm, i) && bonded(i, jp));
      const bool anti = (bonded(i, j) && bonded(j, i)) ||
                        (im >= 0 && jp >= 0 && jm >= 0 && ip >= 0 &&
                         bonded(im, jp) && bonded(jm, ip));
      if (parallel || anti) {
        bridge[i] = true;
        bridge[j] = true;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (helix4[i])
      labels[i] = 'H';
    else if (bridge[i])
      labels[i] = 'E';
    else if (helix35[i])
      labels[i] = 'H';
  }
  return labels;
}

}  // namespace pcc
