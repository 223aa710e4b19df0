#include "pcc/complex.hpp"

#include <gtest/gtest.h>

#include "pcc/errors.hpp"
#include "pcc/fixtures.hpp"
#include "pcc/sse.hpp"

namespace pcc {
namespace {

std::vector<Vec3> line_coords(const std::vector<double>& xs) {
  std::vector<Vec3> out;
  for (double x : xs) out.emplace_back(x, 0.0, 0.0);
  return out;
}

TEST(SparseInt, FromTripletsCoalescesAndSorts) {
  SparseInt m = SparseInt::from_triplets(
      3, 3, {{2, 1, 4}, {0, 2, 1}, {2, 1, -4}, {0, 0, 2}, {0, 0, 3}});
  EXPECT_EQ(m.nnz(), 2);  // (2,1) cancels, (0,0) merges
  EXPECT_EQ(m.at(0, 0), 5);
  EXPECT_EQ(m.at(0, 2), 1);
  EXPECT_EQ(m.at(2, 1), 0);
  ASSERT_EQ(m.row_ptr().size(), 4u);
  EXPECT_EQ(m.row_ptr()[3], 2);
}

TEST(SparseInt, Algebra) {
  const SparseInt a =
      SparseInt::from_triplets(2, 3, {{0, 0, 1}, {0, 2, 2}, {1, 1, 3}});
  const SparseInt b =
      SparseInt::from_triplets(3, 2, {{0, 1, 1}, {1, 0, 2}, {2, 1, 5}});
  const SparseInt p = a.multiply(b);
  EXPECT_EQ(p.at(0, 1), 11);
  EXPECT_EQ(p.at(1, 0), 6);
  EXPECT_EQ(p.nnz(), 2);

  const SparseInt at = a.transpose();
  EXPECT_EQ(at.rows(), 3);
  EXPECT_EQ(at.at(2, 0), 2);

  const SparseInt d =
      SparseInt::from_triplets(2, 2, {{0, 0, 7}, {0, 1, 1}, {1, 1, 2}});
  EXPECT_EQ(d.diagonal().nnz(), 2);
  EXPECT_EQ(d.diagonal().at(0, 0), 7);
  EXPECT_EQ(d.diagonal().at(0, 1), 0);

  const SparseInt s = d.subtract(d.diagonal());
  EXPECT_EQ(s.nnz(), 1);
  EXPECT_EQ(s.at(0, 1), 1);

  const SparseInt neg = SparseInt::from_triplets(2, 2, {{0, 0, -3}, {1, 0, 2}});
  const SparseInt c = neg.clamp_nonneg();
  EXPECT_EQ(c.at(0, 0), 0);
  EXPECT_EQ(c.at(1, 0), 2);

  const SparseInt u = SparseInt::from_triplets(2, 2, {{0, 0, 9}, {1, 1, 4}});
  const SparseInt v = SparseInt::from_triplets(2, 2, {{0, 0, 2}, {1, 0, 4}});
  const SparseInt w = u.and_support(v);
  EXPECT_EQ(w.nnz(), 1);
  EXPECT_EQ(w.at(0, 0), 1);

  EXPECT_THROW(a.multiply(a), ShapeMismatch);
  EXPECT_THROW(a.subtract(b), ShapeMismatch);
}

TEST(Knn, KnownLineCase) {
  // x positions 0,1,2,4 with k=2: each node links to its two nearest.
  const auto edges = build_knn_edges(line_coords({0, 1, 2, 4}), 2);
  const std::vector<Edge> expect{{1, 0}, {2, 0}, {0, 1}, {2, 1},
                                 {0, 2}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(edges, expect);
}

TEST(Knn, TieBreaksTowardSmallerIndex) {
  // Node 1 is equidistant from 0 and 2; with k=1 it must pick 0.
  const auto edges = build_knn_edges(line_coords({0, 1, 2}), 1);
  const std::vector<Edge> expect{{1, 0}, {0, 1}, {1, 2}};
  EXPECT_EQ(edges, expect);
}

TEST(Knn, ClampsAndValidates) {
  const auto edges = build_knn_edges(line_coords({0, 1, 2}), 50);
  EXPECT_EQ(edges.size(), 6u);  // k clamped to N-1 = 2
  EXPECT_THROW(build_knn_edges(line_coords({0, 1}), 0), BadConfig);
  EXPECT_THROW(build_knn_edges(line_coords({0}), 1), TooFewNodes);
}

TEST(SseCells, MaximalRunsFiltered) {
  const auto cells = build_sse_cells("HHHHCEEECCCHH", 3);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].start, 0);
  EXPECT_EQ(cells[0].end, 3);
  EXPECT_EQ(cells[0].label, 'H');
  EXPECT_EQ(cells[1].start, 5);
  EXPECT_EQ(cells[1].end, 7);
  EXPECT_EQ(cells[1].label, 'E');
  EXPECT_EQ(cells[2].start, 8);
  EXPECT_EQ(cells[2].end, 10);
  EXPECT_EQ(cells[2].label, 'C');
  // Trailing HH is below min_size.
  const auto all = build_sse_cells("HHHHCEEECCCHH", 2);
  EXPECT_EQ(all.size(), 4u);
  EXPECT_TRUE(build_sse_cells("", 3).empty());
}

TEST(ProteinCC, IncidenceStructure) {
  // 4 nodes; edges by (target, source); cells {0..1} and {2..3}.
  const std::vector<Edge> edges{{1, 0}, {2, 0}, {0, 1}, {3, 2}, {2, 3}};
  const std::vector<SseCell> cells{{0, 1, 'H'}, {2, 3, 'E'}};
  const ProteinCC cc(4, edges, cells);

  const auto b01 = cc.incidence(0, 1).dense();
  const auto b10 = cc.incidence(1, 0).dense();
  ASSERT_EQ(b01.rows(), 4);
  ASSERT_EQ(b01.cols(), 5);
  for (int e = 0; e < 5; ++e) {
    for (int i = 0; i < 4; ++i) {
      EXPECT_EQ(b01(i, e), edges[e].src == i ? 1 : 0);
      EXPECT_EQ(b10(e, i), edges[e].tgt == i ? 1 : 0);
    }
  }

  const auto b20 = cc.incidence(2, 0).dense();
  EXPECT_EQ(b20(0, 0), 1);
  EXPECT_EQ(b20(0, 2), 0);
  EXPECT_EQ(b20(1, 3), 1);
  EXPECT_EQ(cc.incidence(0, 2), cc.incidence(2, 0).transpose());

  const auto b21 = cc.incidence(2, 1).dense();
  // Edge 0 = (1->0) lies inside cell 0; edge 1 = (2->0) crosses.
  EXPECT_EQ(b21(0, 0), 1);
  EXPECT_EQ(b21(0, 1), 0);
  EXPECT_EQ(b21(1, 3), 1);

  const auto b30 = cc.incidence(3, 0).dense();
  EXPECT_EQ(b30.rows(), 1);
  EXPECT_TRUE((b30.array() == 1).all());
  EXPECT_EQ(cc.incidence(3, 2).dense().cols(), 2);

  EXPECT_THROW(cc.incidence(1, 1), SameRank);
  EXPECT_THROW(cc.incidence(4, 0), BadConfig);

  EXPECT_EQ(cc.cell_of()[0], 0);
  EXPECT_EQ(cc.cell_of()[3], 1);
  EXPECT_EQ(cc.find_edge(0, 1), 2);
  EXPECT_EQ(cc.find_edge(1, 3), -1);
  EXPECT_EQ(cc.reverse_edge(0), 2);   // (0->1) <-> (1->0)
  EXPECT_EQ(cc.reverse_edge(1), -1);  // (0->2) has no partner
}

TEST(ProteinCC, LaplacianDegreeAdjacency) {
  const std::vector<Edge> edges{{1, 0}, {0, 1}, {2, 1}, {1, 2}};
  const ProteinCC cc(3, edges, {{0, 1, 'H'}});
  const SparseInt lap = cc.laplacian(0, 1);
  EXPECT_EQ(lap, cc.incidence(0, 1).multiply(cc.incidence(1, 0)));
  const Eigen::MatrixXi l = lap.dense();
  const Eigen::MatrixXi d = cc.degree(0, 1).dense();
  const Eigen::MatrixXi a = cc.adjacency(0, 1).dense();
  EXPECT_TRUE((l - d - a).isZero());
  // L(i,j) counts directed edges i -> j; self-loops are rejected at
  // construction, so the rank-0 diagonal (and the degree matrix) is zero.
  Eigen::MatrixXi want = Eigen::MatrixXi::Zero(3, 3);
  want(1, 0) = 1;
  want(0, 1) = 1;
  want(2, 1) = 1;
  want(1, 2) = 1;
  EXPECT_EQ(l, want);
  EXPECT_TRUE(d.isZero());
  EXPECT_EQ(a, l);

  // Through the cell rank the diagonal is meaningful: L(c,c) counts edges
  // with both endpoints inside cell c.
  const Eigen::MatrixXi l2 = cc.laplacian(2, 1).dense();
  const Eigen::MatrixXi d2 = cc.degree(2, 1).dense();
  const Eigen::MatrixXi a2 = cc.adjacency(2, 1).dense();
  ASSERT_EQ(l2.rows(), 1);
  EXPECT_EQ(l2(0, 0), 2);  // 1->0 and 0->1 both live inside {0,1}
  EXPECT_EQ(d2(0, 0), 2);
  EXPECT_TRUE(a2.isZero());
  EXPECT_TRUE((l2 - d2 - a2).isZero());
}

TEST(ProteinCC, OuterEdgeNeighborhoods) {
  // e0 = 2->0, e1 = 0->2, e2 = 1->2; cell 0 covers nodes {0,1}.
  const std::vector<Edge> given{{2, 0}, {0, 2}, {1, 2}};
  const ProteinCC cc(3, given, {{0, 1, 'H'}});

  const auto leave = cc.outer_leaving().dense();
  const auto enter = cc.outer_entering_t().dense();
  const auto inter = cc.intersection().dense();
  ASSERT_EQ(leave.rows(), 1);
  ASSERT_EQ(leave.cols(), 3);
  // given[1] = 0->2 and given[2] = 1->2 leave the cell; given[0] = 2->0 enters.
  EXPECT_EQ(leave(0, 0), 0);
  EXPECT_EQ(leave(0, 1), 1);
  EXPECT_EQ(leave(0, 2), 1);
  EXPECT_EQ(enter(0, 0), 1);
  EXPECT_EQ(enter(0, 1), 0);
  EXPECT_EQ(enter(0, 2), 0);
  // Only 0->2 has the reverse edge present, so the intersection keeps it
  // alone, in the outgoing orientation.
  EXPECT_EQ(inter(0, 0), 0);
  EXPECT_EQ(inter(0, 1), 1);
  EXPECT_EQ(inter(0, 2), 0);

  EXPECT_EQ(cc.inner_edges()[0].size(), 0u);
  ASSERT_EQ(cc.intersection_edges()[0].size(), 1u);
  EXPECT_EQ(cc.intersection_edges()[0][0], 1);
}

TEST(ProteinCC, InnerEdgesListed) {
  const std::vector<Edge> edges{{1, 0}, {0, 1}, {2, 0}};
  const ProteinCC cc(3, edges, {{0, 1, 'E'}});
  ASSERT_EQ(cc.inner_edges().size(), 1u);
  EXPECT_EQ(cc.inner_edges()[0], (std::vector<int32_t>{0, 1}));
}

TEST(BuildPcc, EndToEndCounts) {
  const ProteinStructure s = make_helix(12);
  const ProteinCC cc = build_pcc(s, assign_sse3(s), 4, 3);
  EXPECT_EQ(cc.num_nodes(), 12);
  EXPECT_EQ(cc.edges().size(), 48u);
  EXPECT_EQ(cc.incidence(3, 0).dense().sum(), 12);
}

}  // namespace
}  // namespace pcc
