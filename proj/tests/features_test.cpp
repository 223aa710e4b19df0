#include "pcc/features.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "pcc/errors.hpp"
#include "pcc/fixtures.hpp"
#include "pcc/sse.hpp"

namespace pcc {
namespace {

Vec3 vec_at(const RankFeatures& f, int64_t row, int channel) {
  return Vec3(f.v[0](row, channel), f.v[1](row, channel), f.v[2](row, channel));
}

std::vector<Vec3> centered_ca(const ProteinStructure& s) {
  std::vector<Vec3> pts = s.ca_coords();
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  for (Vec3& p : pts) p -= mean;
  return pts;
}

TEST(Dihedrals, MasksFollowChainEnds) {
  const ProteinStructure s = concat_chains({make_helix(4), make_helix(3)});
  const DihedralSet d = backbone_dihedrals(s);
  EXPECT_FALSE(d.has_phi[0]);
  EXPECT_FALSE(d.has_omega[0]);
  EXPECT_TRUE(d.has_phi[1]);
  EXPECT_FALSE(d.has_psi[3]);  // chain A end
  EXPECT_FALSE(d.has_phi[4]);  // chain B start
  EXPECT_TRUE(d.has_psi[4]);
  EXPECT_FALSE(d.has_psi[6]);
}

TEST(VirtualAngles, NeedFourAndFiveResidueWindows) {
  const ProteinStructure s = make_helix(6);
  const VirtualAngleSet a = virtual_angles(s);
  EXPECT_FALSE(a.has_alpha[0]);
  EXPECT_TRUE(a.has_alpha[1]);
  EXPECT_TRUE(a.has_alpha[3]);
  EXPECT_FALSE(a.has_alpha[4]);  // needs i+2
  EXPECT_FALSE(a.has_kappa[1]);
  EXPECT_TRUE(a.has_kappa[2]);
  EXPECT_TRUE(a.has_kappa[3]);
  EXPECT_FALSE(a.has_kappa[4]);
  const double k = bond_angle(s.residues[0].ca, s.residues[2].ca,
                              s.residues[4].ca);
  EXPECT_NEAR(a.kappa[2], k, 1e-12);
}

TEST(SideChain, UnitWhenBackbonePresent) {
  const ProteinStructure s = make_helix(3);
  const Vec3 d = side_chain_direction(s.residues[1]);
  EXPECT_NEAR(d.norm(), 1.0, 1e-12);
  const Vec3 un = (s.residues[1].n - s.residues[1].ca).normalized();
  const Vec3 uc = (s.residues[1].c - s.residues[1].ca).normalized();
  EXPECT_LT(d.dot((un + uc).normalized()), 0.0);  // points away from backbone
  Residue r = s.residues[1];
  r.has_n = false;
  EXPECT_TRUE(side_chain_direction(r).isZero());
}

TEST(ShapeDescriptors, AnalyticTriples) {
  const Eigen::VectorXd line = shape_descriptors(Vec3(1, 0, 0), true);
  ASSERT_EQ(line.size(), 8);
  const double line_expect[8] = {1, 0, 0, 0, 1, 0, 1, 0};
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(line[i], line_expect[i], 1e-12);

  const Eigen::VectorXd ball = shape_descriptors(Vec3(1, 1, 1), true);
  const double ball_expect[8] = {0,          0, 1, 1.0 / 3.0,
                                 0,          std::log(3.0),
                                 3,          1.0 / 3.0};
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(ball[i], ball_expect[i], 1e-12);

  const Eigen::VectorXd plane = shape_descriptors(Vec3(2, 1, 0), true);
  const double plane_expect[8] = {
      0.5, 0.5, 0, 0, 1, std::log(3.0) - (2.0 / 3.0) * std::log(2.0), 3, 0};
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(plane[i], plane_expect[i], 1e-12);

  const Eigen::VectorXd plain = shape_descriptors(Vec3(2, 1, 0), false);
  ASSERT_EQ(plain.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(plain[i], plane[i]);

  EXPECT_THROW(shape_descriptors(Vec3(0, 0, 0), true), ZeroSpectrum);
  // Negative tail clamps to zero before normalizing.
  const Eigen::VectorXd cl = shape_descriptors(Vec3(2, -1, -3), true);
  EXPECT_NEAR(cl[0], 1.0, 1e-12);
  EXPECT_NEAR(cl[6], 2.0, 1e-12);
}

TEST(ContactStats, CountsFarPairsOnly) {
  std::vector<Vec3> line;
  for (int i = 0; i < 8; ++i) line.emplace_back(3.8 * i, 0, 0);
  const ContactStats none = contact_stats(line);
  EXPECT_DOUBLE_EQ(none.density, 0.0);
  EXPECT_DOUBLE_EQ(none.order, 0.0);

  std::vector<Vec3> blob;
  for (int i = 0; i < 5; ++i) blob.emplace_back(0.5 * i, 0.25 * i, 0);
  // Pairs with separation >= 3: (0,3), (0,4), (1,4); all within 8 A.
  const ContactStats st = contact_stats(blob);
  EXPECT_DOUBLE_EQ(st.density, 3.0 / 10.0);
  EXPECT_DOUBLE_EQ(st.order, (10.0 / 3.0) / 5.0);
}

TEST(Featurize, WidthsAndCounts) {
  Rng rng(7);
  const ProteinStructure s = make_mixed(24, rng);
  const ProteinCC cc = build_pcc(s, assign_sse3(s), 5, 3);
  const FeatureSet fs = featurize(s, cc, centered_ca(s));
  for (int r = 0; r < 4; ++r) {
    EXPECT_EQ(fs.rank[r].scalar_width(), kFeatureScalarWidths[r]);
    EXPECT_EQ(fs.rank[r].vector_width(), kFeatureVectorWidths[r]);
  }
  EXPECT_EQ(fs.rank[0].count(), 24);
  EXPECT_EQ(fs.rank[1].count(), static_cast<int64_t>(cc.edges().size()));
  EXPECT_EQ(fs.rank[2].count(), static_cast<int64_t>(cc.cells().size()));
  EXPECT_EQ(fs.rank[3].count(), 1);
}

TEST(Featurize, NodeBlocks) {
  const ProteinStructure s = make_helix(8);  // all alanine
  const ProteinCC cc = build_pcc(s, assign_sse3(s), 3, 3);
  const auto centered = centered_ca(s);

  FeatureOptions opt;
  opt.threedi = std::string(8, 'A');
  const FeatureSet fs = featurize(s, cc, centered, opt);
  const RankFeatures& f0 = fs.rank[0];

  EXPECT_DOUBLE_EQ(f0.s(2, 0), 1.0);  // alanine one-hot
  EXPECT_DOUBLE_EQ(f0.s.row(2).segment(0, 23).sum(), 1.0);
  EXPECT_DOUBLE_EQ(f0.s(2, 23), 1.0);  // structural letter 'A'
  EXPECT_DOUBLE_EQ(f0.s.row(2).segment(23, 21).sum(), 1.0);

  const Eigen::VectorXd pe = positional_encoding(3.0, 16);
  for (int k = 0; k < 16; ++k) EXPECT_DOUBLE_EQ(f0.s(3, 44 + k), pe[k]);

  // Chain ends leave angle slots zeroed.
  EXPECT_DOUBLE_EQ(f0.s(0, 64), 0.0);
  EXPECT_DOUBLE_EQ(f0.s(0, 65), 0.0);
  const DihedralSet d = backbone_dihedrals(s);
  EXPECT_DOUBLE_EQ(f0.s(3, 64), std::sin(d.phi[3]));
  EXPECT_DOUBLE_EQ(f0.s(3, 65), std::cos(d.phi[3]));
  EXPECT_DOUBLE_EQ(f0.s(3, 67), std::cos(d.psi[3]));

  EXPECT_TRUE(vec_at(f0, 0, 0).isZero());  // no previous residue
  const Vec3 to_prev = (centered[2] - centered[3]).normalized();
  EXPECT_LT((vec_at(f0, 3, 0) - to_prev).norm(), 1e-12);
  const Vec3 to_next = (centered[4] - centered[3]).normalized();
  EXPECT_LT((vec_at(f0, 3, 1) - to_next).norm(), 1e-12);
  EXPECT_NEAR(vec_at(f0, 3, 2).norm(), 1.0, 1e-12);

  // Sequence withheld: residue-type block zeroed, the rest intact.
  FeatureOptions noseq = opt;
  noseq.with_sequence = false;
  const FeatureSet fs2 = featurize(s, cc, centered, noseq);
  EXPECT_TRUE(fs2.rank[0].s.leftCols(23).isZero());
  EXPECT_DOUBLE_EQ(fs2.rank[0].s(2, 23), 1.0);
  // No structural track: that block zeroed.
  const FeatureSet fs3 = featurize(s, cc, centered);
  EXPECT_TRUE(fs3.rank[0].s.middleCols(23, 21).isZero());
}

TEST(Featurize, EdgeBlocks) {
  const ProteinStructure s = make_helix(6);
  const ProteinCC cc = build_pcc(s, assign_sse3(s), 2, 3);
  const auto centered = centered_ca(s);
  const FeatureSet fs = featurize(s, cc, centered);
  const RankFeatures& f1 = fs.rank[1];
  for (size_t e = 0; e < cc.edges().size(); ++e) {
    const Vec3 d = centered[cc.edges()[e].src] - centered[cc.edges()[e].tgt];
    EXPECT_NEAR(f1.s(e, 0), d.norm(), 1e-12);
    const Eigen::VectorXd pe = positional_encoding(d.norm(), 16);
    for (int k = 0; k < 16; ++k) EXPECT_DOUBLE_EQ(f1.s(e, 1 + k), pe[k]);
    EXPECT_LT((vec_at(f1, e, 0) - d.normalized()).norm(), 1e-12);
  }
}

TEST(Featurize, SegmentBlocks) {
  const ProteinStructure s = make_helix(12);
  const std::string labels = "HHHHEEEECCCC";
  const ProteinCC cc = build_pcc(s, labels, 4, 3);
  ASSERT_EQ(cc.cells().size(), 3u);
  const auto centered = centered_ca(s);
  const FeatureSet fs = featurize(s, cc, centered);
  const RankFeatures& f2 = fs.rank[2];

  EXPECT_DOUBLE_EQ(f2.s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f2.s(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(f2.s(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(f2.s(0, 3), 4.0);
  const Eigen::VectorXd pe_start = positional_encoding(4.0, 10);
  const Eigen::VectorXd pe_end = positional_encoding(7.0, 10);
  for (int k = 0; k < 10; ++k) {
    EXPECT_DOUBLE_EQ(f2.s(1, 4 + k), pe_start[k]);
    EXPECT_DOUBLE_EQ(f2.s(1, 14 + k), pe_end[k]);
  }
  // First cell has no predecessor; neighbor angles are symmetric.
  EXPECT_DOUBLE_EQ(f2.s(0, 24), 0.0);
  EXPECT_DOUBLE_EQ(f2.s(0, 25), 0.0);
  EXPECT_DOUBLE_EQ(f2.s(0, 26), f2.s(1, 24));
  EXPECT_DOUBLE_EQ(f2.s(0, 27), f2.s(1, 25));
  EXPECT_DOUBLE_EQ(f2.s(2, 26), 0.0);

  const Vec3 mid_dir = (centered[2] - centered[0]).normalized();
  EXPECT_LT((vec_at(f2, 0, 0) - mid_dir).norm(), 1e-12);
  const Vec3 span_dir = (centered[3] - centered[0]).normalized();
  EXPECT_LT((vec_at(f2, 0, 1) - span_dir).norm(), 1e-12);
  for (int k = 6; k < 9; ++k) EXPECT_NEAR(vec_at(f2, 0, k).norm(), 1.0, 1e-12);
  EXPECT_TRUE(vec_at(f2, 0, 9).isZero());     // no previous cell
  EXPECT_FALSE(vec_at(f2, 0, 10).isZero());   // next cell exists
  EXPECT_TRUE(vec_at(f2, 2, 10).isZero());
  EXPECT_LT((vec_at(f2, 0, 11) - (-centered[0]).normalized()).norm(), 1e-12);
}

TEST(Featurize, ProteinBlocks) {
  const ProteinStructure s = make_helix(8);  // n = 8 < extreme-list capacity
  const ProteinCC cc = build_pcc(s, assign_sse3(s), 3, 3);
  const auto centered = centered_ca(s);
  const FeatureSet fs = featurize(s, cc, centered);
  const RankFeatures& f3 = fs.rank[3];

  EXPECT_DOUBLE_EQ(f3.s(0, 0), 8.0);
  EXPECT_NEAR(f3.s.row(0).segment(1, 23).sum(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(f3.s(0, 1), 1.0);  // all alanine
  EXPECT_NEAR(f3.s.row(0).segment(24, 3).sum(), 1.0, 1e-12);

  EXPECT_GE(f3.s(0, 33), f3.s(0, 34));
  EXPECT_GE(f3.s(0, 34), f3.s(0, 35));
  const Eigen::VectorXd sd =
      shape_descriptors(Vec3(f3.s(0, 33), f3.s(0, 34), f3.s(0, 35)), true);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(f3.s(0, 36 + k), sd[k], 1e-12);

  double rg2 = 0.0;
  for (const Vec3& p : centered) rg2 += p.squaredNorm();
  EXPECT_NEAR(f3.s(0, 44), std::sqrt(rg2 / 8.0), 1e-12);

  for (int k = 0; k < 3; ++k) EXPECT_NEAR(vec_at(f3, 0, k).norm(), 1.0, 1e-9);
  // Extreme-point lists: 8 entries then zero padding.
  int arg_far = 0, arg_near = 0;
  for (int i = 1; i < 8; ++i) {
    if (centered[i].squaredNorm() > centered[arg_far].squaredNorm())
      arg_far = i;
    if (centered[i].squaredNorm() < centered[arg_near].squaredNorm())
      arg_near = i;
  }
  EXPECT_LT((vec_at(f3, 0, 3) - centered[arg_far].normalized()).norm(), 1e-12);
  EXPECT_TRUE(vec_at(f3, 0, 11).isZero());
  EXPECT_TRUE(vec_at(f3, 0, 12).isZero());
  EXPECT_LT((vec_at(f3, 0, 13) - centered[arg_near].normalized()).norm(),
            1e-12);
  EXPECT_TRUE(vec_at(f3, 0, 21).isZero());
  EXPECT_TRUE(vec_at(f3, 0, 22).isZero());
}

TEST(Featurize, AnnotationValidation) {
  const ProteinStructure s = make_helix(6);
  const ProteinCC cc = build_pcc(s, assign_sse3(s), 2, 3);
  const auto centered = centered_ca(s);
  FeatureOptions opt;
  opt.threedi = "AAA";  // wrong length
  EXPECT_THROW(featurize(s, cc, centered, opt), LengthMismatch);
  opt.threedi = "AAAAA@";
  EXPECT_THROW(featurize(s, cc, centered, opt), UnknownSymbol);
}

TEST(Pipeline, OverridesAndDefaults) {
  const ProteinStructure s = make_helix(10);
  PipelineOptions opt;
  opt.knn = 3;
  opt.sse_override = "H\nH\nH\nH\nH\nC\nC\nC\nC\nC\n";
  const Pipeline p = run_pipeline(s, opt);
  EXPECT_EQ(p.sse, "HHHHHCCCCC");
  ASSERT_EQ(p.cc.cells().size(), 2u);
  EXPECT_EQ(p.cc.cells()[0].label, 'H');
  EXPECT_EQ(p.cc.edges().size(), 30u);
  Vec3 sum = Vec3::Zero();
  for (const Vec3& q : p.centered) sum += q;
  EXPECT_LT(sum.norm(), 1e-9);
  EXPECT_EQ(p.features.rank[0].count(), 10);
  EXPECT_EQ(p.scalarizers.node.size(), 10u);
}

}  // namespace
}  // namespace pcc
