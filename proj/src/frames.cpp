#include "pcc/frames.hpp"

#include <Eigen/Eigenvalues>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

// Complete a unit a1 into a right-handed frame using the canonical basis
// vector least aligned with it.
Mat3 complete_frame(const Vec3& a1) {
  int best = 0;
  double best_abs = std::abs(a1[0]);
  for (int k = 1; k < 3; ++k) {
    if (std::abs(a1[k]) < best_abs) {
      best_abs = std::abs(a1[k]);
      best = k;
    }
  }
  Vec3 e = Vec3::Zero();
  e[best] = 1.0;
  const Vec3 a2 = (e - e.dot(a1) * a1).normalized();
  Mat3 f;
  f.row(0) = a1;
  f.row(1) = a2;
  f.row(2) = a1.cross(a2);
  return f;
}

Mat3 frame_from_pair(const Vec3& xi, const Vec3& xj, const char* what) {
  const Vec3 d = xj - xi;
  if (d.norm() < kDegenEps) {
    throw CoincidentPoints(std::string(what) + ": endpoints coincide");
  }
  const Vec3 a1 = d.normalized();
  const Vec3 c = xj.cross(xi);
  if (c.norm() < kDegenEps) return complete_frame(a1);
  Mat3 f;
  f.row(0) = a1;
  f.row(1) = c.normalized();
  f.row(2) = a1.cross(f.row(1));
  return f;
}

}  // namespace

Mat3 edge_frame(const Vec3& xi, const Vec3& xj) {
  return frame_from_pair(xi, xj, "edge frame");
}

Mat3 node_com_frame(const Vec3& xi, const std::vector<Vec3>& neighbors) {
  if (neighbors.empty()) {
    throw IsolatedNode("node frame needs at least one neighbor");
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : neighbors) mean += p;
  mean /= static_cast<double>(neighbors.size());
  return frame_from_pair(xi, mean, "node frame");
}

Mat3 sse_com_anchor_frame(const Vec3& com, const Vec3& anchor) {
  if (com.norm() < kDegenEps) {
    throw ZeroCom("segment frame needs a nonzero center of mass");
  }
  const Vec3 a1 = (-com).normalized();
  const Vec3 c = anchor.cross(com);
  if (c.norm() < kDegenEps) return complete_frame(a1);
  Mat3 f;
  f.row(0) = a1;
  f.row(1) = c.normalized();
  f.row(2) = a1.cross(f.row(1));
  return f;
}

Vec3 sign_fix(const Vec3& v, const Vec3& anchor) {
  const double d = v.dot(anchor);
  if (d > kDegenEps) return v;
  if (d < -kDegenEps) return -v;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(v[k]) > kDegenEps) return v[k] > 0 ? v : Vec3(-v);
  }
  return v;
}

Vec3 farthest_anchor(const std::vector<Vec3>& centered) {
  if (centered.empty()) {
    throw DegenerateCloud("anchor needs at least one point");
  }
  size_t best = 0;
  double best_sq = centered[0].squaredNorm();
  for (size_t i = 1; i < centered.size(); ++i) {
    const double sq = centered[i].squaredNorm();
    if (sq > best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return centered[best];
}

Spectrum principal_spectrum(const std::vector<Vec3>& points,
                            const Vec3& anchor) {
  if (points.empty()) {
    throw DegenerateCloud("spectrum needs at least one point");
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  Spectrum out;
  for (int k = 0; k < 3; ++k) {
    // solver sorts ascending
    out.values[k] = es.eigenvalues()[2 - k];
    out.axes.row(k) = sign_fix(es.eigenvectors().col(2 - k), anchor);
  }
  return out;
}

Mat3 protein_frame(const std::vector<Vec3>& centered) {
  const Vec3 anchor = farthest_anchor(centered);
  const Spectrum sp = principal_spectrum(centered, anchor);
  if (sp.values[0] <= 0 || sp.values[1] <= 1e-9 * sp.values[0]) {
    throw DegenerateCloud("coordinate cloud is degenerate (rank < 2)");
  }
  Vec3 v1 = sp.axes.row(0).normalized();
  Vec3 v2 = sp.axes.row(1);
  v2 = (v2 - v2.dot(v1) * v1).normalized();
  Vec3 v3 = sp.axes.row(2);
  v3 = (v3 - v3.dot(v1) * v1 - v3.dot(v2) * v2);
  if (v3.norm() < kDegenEps) {
    v3 = v1.cross(v2);
  } else {
    v3.normalize();
  }
  if (v1.dot(v2.cross(v3)) < 0) v3 = -v3;
  Mat3 f;
  f.row(0) = v1;
  f.row(1) = v2;
  f.row(2) = v3;
  return f;
}

Eigen::VectorXd scalarize(const Eigen::MatrixXd& v, const Mat3& frame) {
  if (v.cols() != 3) {
    throw ShapeMismatch("scalarize expects 3 columns, got " +
                        std::to_string(v.cols()));
  }
  const Eigen::MatrixXd prod = v * frame.transpose();
  Eigen::VectorXd out(prod.size());
  for (Eigen::Index c = 0; c < prod.rows(); ++c) {
    for (Eigen::Index k = 0; k < 3; ++k) out[3 * c + k] = prod(c, k);
  }
  return out;
}

const Mat3& ScalarizerSet::at(int rank, int index) const {
  switch (rank) {
    case 0:
      return node.at(index);
    case 1:
      return edge.at(index);
    case 2:
      return cell.at(index);
    case 3:
      return protein;
    default:
      throw BadConfig("rank outside 0..3");
  }
}

ScalarizerSet build_scalarizers(const ProteinCC& cc,
                                const std::vector<Vec3>& centered) {
  const int32_t n = cc.num_nodes();
  const auto& edges = cc.edges();
  ScalarizerSet out;

  out.edge.resize(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    out.edge[e] = edge_frame(centered[edges[e].tgt], centered[edges[e].src]);
  }

  out.node.assign(n, Mat3::Zero());
  std::vector<int32_t> degree(n, 0);
  for (size_t e = 0; e < edges.size(); ++e) {
    out.node[edges[e].src] += out.edge[e];
    degree[edges[e].src]++;
  }
  for (int32_t i = 0; i < n; ++i) {
    if (degree[i] == 0) {
      throw IsolatedNode("node " + std::to_string(i) + " has no outgoing edges");
    }
    out.node[i] /= static_cast<double>(degree[i]);
  }

  out.protein = protein_frame(centered);

  out.cell.assign(cc.cells().size(), Mat3::Zero());
  for (size_t c = 0; c < cc.cells().size(); ++c) {
    const auto& cross = cc.intersection_edges()[c];
    if (cross.empty()) {
      out.cell[c] = out.protein;
      continue;
    }
    for (int32_t e : cross) out.cell[c] += out.edge[e];
    out.cell[c] /= static_cast<double>(cross.size());
  }
  return out;
}

}  // namespace pcc
