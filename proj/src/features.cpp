#include "pcc/features.hpp"

#include <algorithm>
#include <cmath>

#include "pcc/errors.hpp"
#include "pcc/sse.hpp"

namespace pcc {

namespace {

constexpr double kContactRadius = 8.0;
constexpr int kContactMinSep = 3;
constexpr int kExtremeCount = 10;

int sse_type_index(char label) {
  switch (label) {
    case 'H':
      return 0;
    case 'E':
      return 1;
    case 'C':
      return 2;
    default:
      throw UnknownSymbol(std::string("secondary-structure label '") + label +
                          "' is not one of H, E, C");
  }
}

void set_vec(RankFeatures& f, int64_t row, int channel, const Vec3& v) {
  for (int k = 0; k < 3; ++k) f.v[k](row, channel) = v[k];
}

RankFeatures zero_rank(int64_t count, int scalar_width, int vector_width) {
  RankFeatures f;
  f.s = Eigen::MatrixXd::Zero(count, scalar_width);
  for (int k = 0; k < 3; ++k) {
    f.v[k] = Eigen::MatrixXd::Zero(count, vector_width);
  }
  return f;
}

// sin and cos of the angle between two unit axes, in [0, pi].
std::pair<double, double> axis_angle_sincos(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  const double s = std::min(a.cross(b).norm(), 1.0);
  return {s, c};
}

}  // namespace

DihedralSet backbone_dihedrals(const ProteinStructure& s) {
  const size_t n = s.size();
  DihedralSet d;
  d.phi.assign(n, 0.0);
  d.psi.assign(n, 0.0);
  d.omega.assign(n, 0.0);
  d.has_phi.assign(n, 0);
  d.has_psi.assign(n, 0);
  d.has_omega.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const Residue& r = s.residues[i];
    if (s.has_prev(i)) {
      const Residue& p = s.residues[i - 1];
      if (p.has_c && r.has_n && r.has_c) {
        d.phi[i] = dihedral(p.c, r.n, r.ca, r.c);
        d.has_phi[i] = 1;
      }
      if (p.has_c && r.has_n) {
        d.omega[i] = dihedral(p.ca, p.c, r.n, r.ca);
        d.has_omega[i] = 1;
      }
    }
    if (s.has_next(i)) {
      const Residue& nx = s.residues[i + 1];
      if (r.has_n && r.has_c && nx.has_n) {
        d.psi[i] = dihedral(r.n, r.ca, r.c, nx.n);
        d.has_psi[i] = 1;
      }
    }
  }
  return d;
}

VirtualAngleSet virtual_angles(const ProteinStructure& s) {
  const size_t n = s.size();
  VirtualAngleSet a;
  a.alpha.assign(n, 0.0);
  a.kappa.assign(n, 0.0);
  a.has_alpha.assign(n, 0);
  a.has_kappa.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (i >= 1 && i + 2 < n && s.same_chain(i - 1, i + 2)) {
      a.alpha[i] = dihedral(s.residues[i - 1].ca, s.residues[i].ca,
                            s.residues[i + 1].ca, s.residues[i + 2].ca);
      a.has_alpha[i] = 1;
    }
    if (i >= 2 && i + 2 < n && s.same_chain(i - 2, i + 2)) {
      a.kappa[i] =
          bond_angle(s.residues[i - 2].ca, s.residues[i].ca,
                     s.residues[i + 2].ca);
      a.has_kappa[i] = 1;
    }
  }
  return a;
}

Vec3 side_chain_direction(const Residue& r) {
  if (!r.has_n || !r.has_c) return Vec3::Zero();
  const Vec3 un = unit_or_zero(r.n - r.ca);
  const Vec3 uc = unit_or_zero(r.c - r.ca);
  if (un.isZero() || uc.isZero()) return Vec3::Zero();
  const Vec3 u1 = unit_or_zero(un + uc);
  const Vec3 u2 = unit_or_zero(uc.cross(un));
  if (u1.isZero() || u2.isZero()) return Vec3::Zero();
  return -std::sqrt(1.0 / 3.0) * u1 - std::sqrt(2.0 / 3.0) * u2;
}

Eigen::VectorXd shape_descriptors(Vec3 eigenvalues, bool extended) {
  for (int k = 0; k < 3; ++k) eigenvalues[k] = std::max(eigenvalues[k], 0.0);
  const double l1 = eigenvalues[0], l2 = eigenvalues[1], l3 = eigenvalues[2];
  if (l1 <= 0) throw ZeroSpectrum("eigenvalue spectrum is zero");
  const double sum = l1 + l2 + l3;
  const Vec3 e = eigenvalues / sum;
  Eigen::VectorXd out(extended ? 8 : 5);
  out[0] = (l1 - l2) / l1;
  out[1] = (l2 - l3) / l1;
  out[2] = l3 / l1;
  out[3] = std::cbrt(e[0] * e[1] * e[2]);
  out[4] = (l1 - l3) / l1;
  if (extended) {
    double entropy = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (e[k] > 0) entropy -= e[k] * std::log(e[k]);
    }
    out[5] = entropy;
    out[6] = sum;
    out[7] = e[2];
  }
  return out;
}

ContactStats contact_stats(const std::vector<Vec3>& ca) {
  const int64_t n = static_cast<int64_t>(ca.size());
  int64_t close = 0, sep_sum = 0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = i + 1; j < n; ++j) {
      if (j - i < kContactMinSep) continue;
      if ((ca[j] - ca[i]).norm() < kContactRadius) {
        ++close;
        sep_sum += j - i;
      }
    }
  }
  ContactStats st{0.0, 0.0};
  const int64_t pairs = n * (n - 1) / 2;
  if (pairs > 0) st.density = static_cast<double>(close) / pairs;
  if (close > 0 && n > 0) {
    st.order = (static_cast<double>(sep_sum) / close) / n;
  }
  return st;
}

FeatureSet featurize(const ProteinStructure& s, const ProteinCC& cc,
                     const std::vector<Vec3>& centered,
                     const FeatureOptions& opt) {
  const int64_t n = cc.num_nodes();
  if (static_cast<size_t>(n) != s.size() || centered.size() != s.size()) {
    throw ShapeMismatch("structure, complex, and coordinates disagree");
  }
  if (!opt.threedi.empty() &&
      opt.threedi.size() != static_cast<size_t>(n)) {
    throw LengthMismatch("structural-alphabet track length " +
                         std::to_string(opt.threedi.size()) +
                         " does not match " + std::to_string(n) + " residues");
  }

  FeatureSet fs;
  for (int r = 0; r < 4; ++r) {
    const int64_t count = r == 0   ? n
                          : r == 1 ? static_cast<int64_t>(cc.edges().size())
                          : r == 2 ? static_cast<int64_t>(cc.cells().size())
                                   : 1;
    fs.rank[r] =
        zero_rank(count, kFeatureScalarWidths[r], kFeatureVectorWidths[r]);
  }

  // Nodes.
  const DihedralSet dih = backbone_dihedrals(s);
  const VirtualAngleSet ang = virtual_angles(s);
  RankFeatures& f0 = fs.rank[0];
  for (int64_t i = 0; i < n; ++i) {
    const Residue& r = s.residues[i];
    if (opt.with_sequence) f0.s(i, r.aa) = 1.0;
    if (!opt.threedi.empty()) {
      const int t = threedi_index_from_char(opt.threedi[i]);
      if (t < 0) {
        throw UnknownSymbol(std::string("structural-alphabet symbol '") +
                            opt.threedi[i] + "'");
      }
      f0.s(i, kAaClasses + t) = 1.0;
    }
    f0.s.row(i).segment(44, 16) =
        positional_encoding(static_cast<double>(s.residues[i].seq_index), 16);
    if (ang.has_alpha[i]) {
      f0.s(i, 60) = std::sin(ang.alpha[i]);
      f0.s(i, 61) = std::cos(ang.alpha[i]);
    }
    if (ang.has_kappa[i]) {
      f0.s(i, 62) = std::sin(ang.kappa[i]);
      f0.s(i, 63) = std::cos(ang.kappa[i]);
    }
    if (dih.has_phi[i]) {
      f0.s(i, 64) = std::sin(dih.phi[i]);
      f0.s(i, 65) = std::cos(dih.phi[i]);
    }
    if (dih.has_psi[i]) {
      f0.s(i, 66) = std::sin(dih.psi[i]);
      f0.s(i, 67) = std::cos(dih.psi[i]);
    }
    if (dih.has_omega[i]) {
      f0.s(i, 68) = std::sin(dih.omega[i]);
      f0.s(i, 69) = std::cos(dih.omega[i]);
    }
    if (s.has_prev(i)) {
      set_vec(f0, i, 0, unit_or_zero(centered[i - 1] - centered[i]));
    }
    if (s.has_next(i)) {
      set_vec(f0, i, 1, unit_or_zero(centered[i + 1] - centered[i]));
    }
    set_vec(f0, i, 2, side_chain_direction(r));
  }

  // Edges.
  RankFeatures& f1 = fs.rank[1];
  const auto& edges = cc.edges();
  for (size_t e = 0; e < edges.size(); ++e) {
    const Vec3 d = centered[edges[e].src] - centered[edges[e].tgt];
    f1.s(e, 0) = d.norm();
    f1.s.row(e).segment(1, 16) = positional_encoding(d.norm(), 16);
    set_vec(f1, e, 0, unit_or_zero(d));
  }

  // Segment cells.
  const Vec3 global_anchor = farthest_anchor(centered);
  const auto& cells = cc.cells();
  const int64_t nc = static_cast<int64_t>(cells.size());
  std::vector<Spectrum> cell_spectra(nc);
  std::vector<Vec3> cell_com(nc);
  for (int64_t c = 0; c < nc; ++c) {
    std::vector<Vec3> member(centered.begin() + cells[c].start,
                             centered.begin() + cells[c].end + 1);
    cell_spectra[c] = principal_spectrum(member, global_anchor);
    Vec3 com = Vec3::Zero();
    for (const Vec3& p : member) com += p;
    cell_com[c] = com / static_cast<double>(member.size());
  }
  RankFeatures& f2 = fs.rank[2];
  for (int64_t c = 0; c < nc; ++c) {
    const SseCell& cell = cells[c];
    f2.s(c, sse_type_index(cell.label)) = 1.0;
    f2.s(c, 3) = cell.size();
    f2.s.row(c).segment(4, 10) =
        positional_encoding(static_cast<double>(cell.start), 10);
    f2.s.row(c).segment(14, 10) =
        positional_encoding(static_cast<double>(cell.end), 10);
    if (c > 0) {
      const auto [sn, cs] = axis_angle_sincos(cell_spectra[c].axes.row(0),
                                              cell_spectra[c - 1].axes.row(0));
      f2.s(c, 24) = sn;
      f2.s(c, 25) = cs;
    }
    if (c + 1 < nc) {
      const auto [sn, cs] = axis_angle_sincos(cell_spectra[c].axes.row(0),
                                              cell_spectra[c + 1].axes.row(0));
      f2.s(c, 26) = sn;
      f2.s(c, 27) = cs;
    }

    const Vec3 st = centered[cell.start];
    const Vec3 mi = centered[cell.start + cell.size() / 2];
    const Vec3 en = centered[cell.end];
    const Vec3 cm = cell_com[c];
    set_vec(f2, c, 0, unit_or_zero(mi - st));
    set_vec(f2, c, 1, unit_or_zero(en - st));
    set_vec(f2, c, 2, unit_or_zero(cm - st));
    set_vec(f2, c, 3, unit_or_zero(en - mi));
    set_vec(f2, c, 4, unit_or_zero(cm - mi));
    set_vec(f2, c, 5, unit_or_zero(cm - en));
    for (int k = 0; k < 3; ++k) {
      set_vec(f2, c, 6 + k, cell_spectra[c].axes.row(k));
    }
    if (c > 0) set_vec(f2, c, 9, unit_or_zero(cell_com[c - 1] - cm));
    if (c + 1 < nc) set_vec(f2, c, 10, unit_or_zero(cell_com[c + 1] - cm));
    set_vec(f2, c, 11, unit_or_zero(-st));
    set_vec(f2, c, 12, unit_or_zero(-cm));
    set_vec(f2, c, 13, unit_or_zero(-en));
  }

  // Whole protein.
  RankFeatures& f3 = fs.rank[3];
  f3.s(0, 0) = static_cast<double>(n);
  if (opt.with_sequence) {
    for (int64_t i = 0; i < n; ++i) {
      f3.s(0, 1 + s.residues[i].aa) += 1.0;
    }
    f3.s.row(0).segment(1, kAaClasses) /= static_cast<double>(n);
  }
  if (nc > 0) {
    std::array<std::vector<double>, 3> sizes_by_type;
    for (int64_t c = 0; c < nc; ++c) {
      sizes_by_type[sse_type_index(cells[c].label)].push_back(
          static_cast<double>(cells[c].size()));
    }
    for (int t = 0; t < 3; ++t) {
      const auto& sz = sizes_by_type[t];
      if (sz.empty()) continue;
      f3.s(0, 24 + t) = static_cast<double>(sz.size()) / nc;
      double mean = 0.0;
      for (double v : sz) mean += v;
      mean /= static_cast<double>(sz.size());
      double var = 0.0;
      for (double v : sz) var += (v - mean) * (v - mean);
      var /= static_cast<double>(sz.size());
      f3.s(0, 27 + t) = mean;
      f3.s(0, 30 + t) = std::sqrt(var);
    }
  }
  const Spectrum global_sp = principal_spectrum(centered, global_anchor);
  f3.s(0, 33) = global_sp.values[0];
  f3.s(0, 34) = global_sp.values[1];
  f3.s(0, 35) = global_sp.values[2];
  f3.s.row(0).segment(36, 8) = shape_descriptors(global_sp.values, true);
  double rg2 = 0.0;
  for (const Vec3& p : centered) rg2 += p.squaredNorm();
  f3.s(0, 44) = std::sqrt(rg2 / static_cast<double>(n));
  const ContactStats cs = contact_stats(centered);
  f3.s(0, 45) = cs.density;
  f3.s(0, 46) = cs.order;

  for (int k = 0; k < 3; ++k) {
    set_vec(f3, 0, k, global_sp.axes.row(k));
  }
  std::vector<int64_t> order(n);
  for (int64_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return centered[a].squaredNorm() > centered[b].squaredNorm();
  });
  const int64_t m = std::min<int64_t>(n, kExtremeCount);
  for (int64_t t = 0; t < m; ++t) {
    set_vec(f3, 0, 3 + t, unit_or_zero(centered[order[t]]));
  }
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return centered[a].squaredNorm() < centered[b].squaredNorm();
  });
  for (int64_t t = 0; t < m; ++t) {
    set_vec(f3, 0, 3 + kExtremeCount + t, unit_or_zero(centered[order[t]]));
  }

  return fs;
}

Pipeline run_pipeline(ProteinStructure s, const PipelineOptions& opt) {
  const size_t n = s.size();
  std::string sse;
  if (!opt.sse_override.empty()) {
    sse = load_annotations(opt.sse_override, AnnotationTrack::Kind::Sse3,
                           n)
              .labels;
  } else {
    sse = assign_sse3(s);
  }
  std::string threedi;
  if (!opt.threedi.empty()) {
    threedi =
        load_annotations(opt.threedi, AnnotationTrack::Kind::ThreeDi, n)
            .labels;
  }

  Vec3 com = Vec3::Zero();
  for (const Residue& r : s.residues) com += r.ca;
  com /= static_cast<double>(n);
  std::vector<Vec3> centered(n);
  for (size_t i = 0; i < n; ++i) centered[i] = s.residues[i].ca - com;

  ProteinCC cc = build_pcc(s, sse, opt.knn, opt.min_sse);
  FeatureOptions fopt;
  fopt.with_sequence = opt.with_sequence;
  fopt.threedi = threedi;
  FeatureSet features = featurize(s, cc, centered, fopt);
  ScalarizerSet scal = build_scalarizers(cc, centered);

  return Pipeline{std::move(s),        std::move(sse), std::move(threedi),
                  com,                 std::move(centered),
                  std::move(cc),       std::move(features),
                  std::move(scal)};
}

}  // namespace pcc
