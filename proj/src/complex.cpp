#include "pcc/complex.hpp"

#include <algorithm>
#include <numeric>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

void require_same_shape(const SparseInt& a, const SparseInt& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows()) +
                        "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

}  // namespace

SparseInt SparseInt::from_triplets(int64_t rows, int64_t cols,
                                   std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw ShapeMismatch("triplet (" + std::to_string(t.row) + "," +
                          std::to_string(t.col) + ") outside " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  SparseInt out(rows, cols);
  for (const Triplet& t : entries) {
    if (!out.trip_.empty() && out.trip_.back().row == t.row &&
        out.trip_.back().col == t.col) {
      out.trip_.back().value += t.value;
    } else {
      out.trip_.push_back(t);
    }
  }
  std::erase_if(out.trip_, [](const Triplet& t) { return t.value == 0; });
  out.build_row_ptr();
  return out;
}

void SparseInt::build_row_ptr() {
  row_ptr_.assign(static_cast<size_t>(rows_) + 1, 0);
  for (const Triplet& t : trip_) row_ptr_[static_cast<size_t>(t.row) + 1]++;
  for (int64_t r = 0; r < rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

int64_t SparseInt::at(int64_t r, int64_t c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
    throw ShapeMismatch("index (" + std::to_string(r) + "," +
                        std::to_string(c) + ") outside " +
                        std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
    if (trip_[k].col == c) return trip_[k].value;
  }
  return 0;
}

SparseInt SparseInt::multiply(const SparseInt& rhs) const {
  if (cols_ != rhs.rows_) {
    throw ShapeMismatch("multiply: " + std::to_string(rows_) + "x" +
                        std::to_string(cols_) + " by " +
                        std::to_string(rhs.rows_) + "x" +
                        std::to_string(rhs.cols_));
  }
  std::vector<Triplet> out;
  std::vector<int64_t> acc(static_cast<size_t>(rhs.cols_), 0);
  std::vector<int64_t> touched;
  for (int64_t r = 0; r < rows_; ++r) {
    touched.clear();
    for (int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int64_t mid = trip_[k].col;
      const int64_t v = trip_[k].value;
      for (int64_t k2 = rhs.row_ptr_[mid]; k2 < rhs.row_ptr_[mid + 1]; ++k2) {
        const int64_t c = rhs.trip_[k2].col;
        if (acc[c] == 0) touched.push_back(c);
        acc[c] += v * rhs.trip_[k2].value;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int64_t c : touched) {
      if (acc[c] != 0) out.push_back({r, c, acc[c]});
      acc[c] = 0;
    }
  }
  return from_triplets(rows_, rhs.cols_, std::move(out));
}

SparseInt SparseInt::subtract(const SparseInt& rhs) const {
  require_same_shape(*this, rhs, "subtract");
  std::vector<Triplet> out = trip_;
  for (const Triplet& t : rhs.trip_) out.push_back({t.row, t.col, -t.value});
  return from_triplets(rows_, cols_, std::move(out));
}

SparseInt SparseInt::transpose() const {
  std::vector<Triplet> out;
  out.reserve(trip_.size());
  for (const Triplet& t : trip_) out.push_back({t.col, t.row, t.value});
  return from_triplets(cols_, rows_, std::move(out));
}

SparseInt SparseInt::and_support(const SparseInt& rhs) const {
  require_same_shape(*this, rhs, "and_support");
  std::vector<Triplet> out;
  for (const Triplet& t : trip_) {
    if (rhs.at(t.row, t.col) != 0) out.push_back({t.row, t.col, 1});
  }
  return from_triplets(rows_, cols_, std::move(out));
}

SparseInt SparseInt::clamp_nonneg() const {
  std::vector<Triplet> out;
  for (const Triplet& t : trip_) {
    if (t.value > 0) out.push_back(t);
  }
  return from_triplets(rows_, cols_, std::move(out));
}

SparseInt SparseInt::diagonal() const {
  std::vector<Triplet> out;
  for (const Triplet& t : trip_) {
    if (t.row == t.col) out.push_back(t);
  }
  return from_triplets(rows_, cols_, std::move(out));
}

Eigen::MatrixXi SparseInt::dense() const {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(static_cast<int>(rows_),
                                            static_cast<int>(cols_));
  for (const Triplet& t : trip_) {
    m(static_cast<int>(t.row), static_cast<int>(t.col)) =
        static_cast<int>(t.value);
  }
  return m;
}

std::vector<Edge> build_knn_edges(const std::vector<Vec3>& coords, int k) {
  const int32_t n = static_cast<int32_t>(coords.size());
  if (k < 1) throw BadConfig("neighbor count must be positive");
  if (n < 2) {
    throw TooFewNodes("need at least 2 residues for a neighbor graph, got " +
                      std::to_string(n));
  }
  const int32_t kk = std::min<int32_t>(k, n - 1);
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(n) * kk);
  std::vector<std::pair<double, int32_t>> cand(n - 1);
  std::vector<int32_t> chosen(kk);
  for (int32_t i = 0; i < n; ++i) {
    size_t m = 0;
    for (int32_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[m++] = {(coords[j] - coords[i]).squaredNorm(), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
    for (int32_t t = 0; t < kk; ++t) chosen[t] = cand[t].second;
    std::sort(chosen.begin(), chosen.end());
    for (int32_t j : chosen) edges.push_back({j, i});
  }
  return edges;
}

std::vector<SseCell> build_sse_cells(const std::string& labels, int min_size) {
  if (min_size < 1) throw BadConfig("minimum segment size must be positive");
  std::vector<SseCell> cells;
  const int32_t n = static_cast<int32_t>(labels.size());
  int32_t start = 0;
  while (start < n) {
    int32_t end = start;
    while (end + 1 < n && labels[end + 1] == labels[start]) ++end;
    if (end - start + 1 >= min_size) {
      cells.push_back({start, end, labels[start]});
    }
    start = end + 1;
  }
  return cells;
}

ProteinCC::ProteinCC(int32_t num_nodes, std::vector<Edge> edges,
                     std::vector<SseCell> cells)
    : n_(num_nodes), edges_(std::move(edges)), cells_(std::move(cells)) {
  if (n_ < 1) throw TooFewNodes("complex needs at least one node");
  const int32_t ne = static_cast<int32_t>(edges_.size());
  const int32_t nc = static_cast<int32_t>(cells_.size());

  cell_of_.assign(n_, -1);
  for (int32_t c = 0; c < nc; ++c) {
    const SseCell& cell = cells_[c];
    if (cell.start < 0 || cell.end >= n_ || cell.start > cell.end) {
      throw DegenerateCell("cell " + std::to_string(c) + " range [" +
                           std::to_string(cell.start) + "," +
                           std::to_string(cell.end) + "] invalid for " +
                           std::to_string(n_) + " nodes");
    }
    for (int32_t i = cell.start; i <= cell.end; ++i) {
      if (cell_of_[i] != -1) {
        throw DegenerateCell("node " + std::to_string(i) +
                             " claimed by two cells");
      }
      cell_of_[i] = c;
    }
  }

  edge_keys_.resize(ne);
  edge_order_.resize(ne);
  for (int32_t e = 0; e < ne; ++e) {
    const Edge& ed = edges_[e];
    if (ed.src < 0 || ed.src >= n_ || ed.tgt < 0 || ed.tgt >= n_) {
      throw ShapeMismatch("edge " + std::to_string(e) + " endpoint outside " +
                          std::to_string(n_) + " nodes");
    }
    if (ed.src == ed.tgt) {
      throw BadConfig("edge " + std::to_string(e) + " is a self-loop");
    }
    edge_keys_[e] = static_cast<int64_t>(ed.src) * n_ + ed.tgt;
    edge_order_[e] = e;
  }
  std::sort(edge_order_.begin(), edge_order_.end(),
            [&](int32_t a, int32_t b) { return edge_keys_[a] < edge_keys_[b]; });
  std::sort(edge_keys_.begin(), edge_keys_.end());
  if (std::adjacent_find(edge_keys_.begin(), edge_keys_.end()) !=
      edge_keys_.end()) {
    throw BadConfig("duplicate directed edge");
  }

  // Directional rank 0<->1 incidences.
  {
    std::vector<Triplet> src_t, tgt_t;
    src_t.reserve(ne);
    tgt_t.reserve(ne);
    for (int32_t e = 0; e < ne; ++e) {
      src_t.push_back({edges_[e].src, e, 1});
      tgt_t.push_back({e, edges_[e].tgt, 1});
    }
    b_[0][1] = SparseInt::from_triplets(n_, ne, std::move(src_t));
    b_[1][0] = SparseInt::from_triplets(ne, n_, std::move(tgt_t));
  }

  // Containment incidences, higher rank indexing rows.
  {
    std::vector<Triplet> c0, c1;
    for (int32_t c = 0; c < nc; ++c) {
      for (int32_t i = cells_[c].start; i <= cells_[c].end; ++i) {
        c0.push_back({c, i, 1});
      }
    }
    for (int32_t e = 0; e < ne; ++e) {
      const int32_t c = cell_of_[edges_[e].src];
      if (c >= 0 && cell_of_[edges_[e].tgt] == c) c1.push_back({c, e, 1});
    }
    b_[2][0] = SparseInt::from_triplets(nc, n_, std::move(c0));
    b_[2][1] = SparseInt::from_triplets(nc, ne, std::move(c1));
  }
  {
    std::vector<Triplet> p0, p1, p2;
    for (int32_t i = 0; i < n_; ++i) p0.push_back({0, i, 1});
    for (int32_t e = 0; e < ne; ++e) p1.push_back({0, e, 1});
    for (int32_t c = 0; c < nc; ++c) p2.push_back({0, c, 1});
    b_[3][0] = SparseInt::from_triplets(1, n_, std::move(p0));
    b_[3][1] = SparseInt::from_triplets(1, ne, std::move(p1));
    b_[3][2] = SparseInt::from_triplets(1, nc, std::move(p2));
  }
  b_[0][2] = b_[2][0].transpose();
  b_[0][3] = b_[3][0].transpose();
  b_[1][2] = b_[2][1].transpose();
  b_[1][3] = b_[3][1].transpose();
  b_[2][3] = b_[3][2].transpose();

  outer_leaving_ =
      b_[2][0].multiply(b_[0][1]).subtract(b_[2][1]).clamp_nonneg();
  outer_entering_t_ =
      b_[2][0].multiply(b_[1][0].transpose()).subtract(b_[2][1]).clamp_nonneg();

  {
    std::vector<Triplet> it;
    for (int32_t e = 0; e < ne; ++e) {
      const int32_t c = cell_of_[edges_[e].src];
      if (c < 0 || cell_of_[edges_[e].tgt] == c) continue;
      if (find_edge(edges_[e].tgt, edges_[e].src) >= 0) it.push_back({c, e, 1});
    }
    intersection_ = SparseInt::from_triplets(nc, ne, std::move(it));
  }

  inner_edges_.assign(nc, {});
  for (const Triplet& t : b_[2][1].triplets()) {
    inner_edges_[t.row].push_back(static_cast<int32_t>(t.col));
  }
  intersection_edges_.assign(nc, {});
  for (const Triplet& t : intersection_.triplets()) {
    intersection_edges_[t.row].push_back(static_cast<int32_t>(t.col));
  }
}

int32_t ProteinCC::find_edge(int32_t src, int32_t tgt) const {
  const int64_t key = static_cast<int64_t>(src) * n_ + tgt;
  const auto it = std::lower_bound(edge_keys_.begin(), edge_keys_.end(), key);
  if (it == edge_keys_.end() || *it != key) return -1;
  return edge_order_[it - edge_keys_.begin()];
}

int32_t ProteinCC::reverse_edge(int32_t e) const {
  return find_edge(edges_[e].tgt, edges_[e].src);
}

const SparseInt& ProteinCC::incidence(int r, int rp) const {
  if (r < 0 || r > 3 || rp < 0 || rp > 3) {
    throw BadConfig("rank outside 0..3");
  }
  if (r == rp) {
    throw SameRank("no incidence between rank " + std::to_string(r) +
                   " and itself");
  }
  return b_[r][rp];
}

SparseInt ProteinCC::laplacian(int r, int via) const {
  return incidence(r, via).multiply(incidence(via, r));
}

SparseInt ProteinCC::degree(int r, int via) const {
  return laplacian(r, via).diagonal();
}

SparseInt ProteinCC::adjacency(int r, int via) const {
  const SparseInt l = laplacian(r, via);
  return l.subtract(l.diagonal());
}

ProteinCC build_pcc(const ProteinStructure& s, const std::string& sse_labels,
                    int k, int min_sse) {
  if (sse_labels.size() != s.size()) {
    throw LengthMismatch("label count " + std::to_string(sse_labels.size()) +
                         " does not match " + std::to_string(s.size()) +
                         " residues");
  }
  return ProteinCC(static_cast<int32_t>(s.size()),
                   build_knn_edges(s.ca_coords(), k),
                   build_sse_cells(sse_labels, min_sse));
}

}  // namespace pcc
