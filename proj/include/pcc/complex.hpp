#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcc/geometry.hpp"
#include "pcc/structure.hpp"

namespace pcc {

struct Triplet {
  int64_t row, col, value;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Immutable sparse integer matrix; triplets sorted by (row, col), coalesced,
// zero-free. All algebra is exact.
class SparseInt {
 public:
  SparseInt() = default;
  SparseInt(int64_t rows, int64_t cols) : rows_(rows), cols_(cols) {}
  static SparseInt from_triplets(int64_t rows, int64_t cols,
                                 std::vector<Triplet> entries);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  int64_t nnz() const { return static_cast<int64_t>(trip_.size()); }
  const std::vector<Triplet>& triplets() const { return trip_; }
  const std::vector<int64_t>& row_ptr() const { return row_ptr_; }

  int64_t at(int64_t r, int64_t c) const;

  SparseInt multiply(const SparseInt& rhs) const;
  SparseInt subtract(const SparseInt& rhs) const;
  SparseInt transpose() const;
  // Entrywise logical AND of nonzero supports; result entries are 1.
  SparseInt and_support(const SparseInt& rhs) const;
  SparseInt clamp_nonneg() const;
  SparseInt diagonal() const;

  bool operator==(const SparseInt& rhs) const {
    return rows_ == rhs.rows_ && cols_ == rhs.cols_ && trip_ == rhs.trip_;
  }

  Eigen::MatrixXi dense() const;

 private:
  int64_t rows_ = 0, cols_ = 0;
  std::vector<Triplet> trip_;
  std::vector<int64_t> row_ptr_;  // size rows_+1 into trip_

  void build_row_ptr();
};

struct Edge {
  int32_t src, tgt;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Contiguous residue range [start, end] sharing one label.
struct SseCell {
  int32_t start, end;
  char label;
  int32_t size() const { return end - start + 1; }
  bool contains(int32_t i) const { return i >= start && i <= end; }
};

// Directed edges (j -> i) from each node i to its k nearest neighbors j;
// k is clamped to N-1. Ties break toward the smaller node index. Output
// ordered by (target, source).
std::vector<Edge> build_knn_edges(const std::vector<Vec3>& coords, int k);

// Maximal runs of one label with length >= min_size, ordered by start.
std::vector<SseCell> build_sse_cells(const std::string& labels, int min_size);

class ProteinCC {
 public:
  ProteinCC(int32_t num_nodes, std::vector<Edge> edges,
            std::vector<SseCell> cells);

  int32_t num_nodes() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<SseCell>& cells() const { return cells_; }
  // Containing 2-cell per node, -1 when none.
  const std::vector<int32_t>& cell_of() const { return cell_of_; }
  // Index of edge (src, tgt), -1 when absent.
  int32_t find_edge(int32_t src, int32_t tgt) const;
  // Index of the oppositely directed edge, -1 when absent.
  int32_t reverse_edge(int32_t e) const;

  // B^{r -> r'}. Rank 0<->1 is directional: B^{0->1}[i,e] = 1 iff source(e)=i,
  // B^{1->0}[e,j] = 1 iff target(e)=j. All other rank pairs are containment.
  const SparseInt& incidence(int r, int rp) const;

  SparseInt laplacian(int r, int via) const;  // B^{r->via} * B^{via->r}
  SparseInt degree(int r, int via) const;
  SparseInt adjacency(int r, int via) const;  // laplacian minus its diagonal

  // Outer-edge neighborhoods: edges leaving a 2-cell, edges entering it,
  // and their intersection (mutual pairs crossing the boundary, kept in the
  // outgoing orientation).
  const SparseInt& outer_leaving() const { return outer_leaving_; }
  const SparseInt& outer_entering_t() const { return outer_entering_t_; }
  const SparseInt& intersection() const { return intersection_; }

  // Per-cell edge index lists derived from the matrices above.
  const std::vector<std::vector<int32_t>>& inner_edges() const {
    return inner_edges_;
  }
  const std::vector<std::vector<int32_t>>& intersection_edges() const {
    return intersection_edges_;
  }

 private:
  int32_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<SseCell> cells_;
  std::vector<int32_t> cell_of_;
  std::vector<int64_t> edge_keys_;    // src * n + tgt, ascending
  std::vector<int32_t> edge_order_;   // edge index for each key

  // incidences indexed [r][rp]
  std::array<std::array<SparseInt, 4>, 4> b_;
  SparseInt outer_leaving_, outer_entering_t_, intersection_;
  std::vector<std::vector<int32_t>> inner_edges_, intersection_edges_;
};

ProteinCC build_pcc(const ProteinStructure& s, const std::string& sse_labels,
                    int k, int min_sse = 3);

}  // namespace pcc
