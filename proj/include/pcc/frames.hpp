#pragma once

#include <vector>

#include <Eigen/Core>

#include "pcc/complex.hpp"
#include "pcc/geometry.hpp"

namespace pcc {

// All frames are 3x3 matrices whose ROWS are the axes.

// a1 = unit(xj - xi), a2 = unit(xj x xi), a3 = a1 x a2. When the cross
// product degenerates (xi, xj, origin collinear) the frame is completed
// from the canonical basis instead. Coincident endpoints are an error.
Mat3 edge_frame(const Vec3& xi, const Vec3& xj);

// Same construction against the mean of the neighbor positions.
Mat3 node_com_frame(const Vec3& xi, const std::vector<Vec3>& neighbors);

// a1 = unit(-com), a2 = unit(anchor x com). Zero com is an error.
Mat3 sse_com_anchor_frame(const Vec3& com, const Vec3& anchor);

// Flip v so it points toward the anchor; when orthogonal to it, make the
// first nonzero component positive.
Vec3 sign_fix(const Vec3& v, const Vec3& anchor);

// Point with the largest norm, ties toward the lower index.
Vec3 farthest_anchor(const std::vector<Vec3>& centered);

struct Spectrum {
  Vec3 values;  // eigenvalues, descending
  Mat3 axes;    // rows are unit eigenvectors, sign-fixed
};

// Principal axes of the covariance (about the subset mean, population
// normalization), sign-fixed against the anchor. No orthogonality repair.
Spectrum principal_spectrum(const std::vector<Vec3>& points,
                            const Vec3& anchor);

// Principal axes of centered coordinates, sign-fixed against the farthest
// point, re-orthonormalized, right-handed. Needs a cloud of rank >= 2.
Mat3 protein_frame(const std::vector<Vec3>& centered);

// out[3c + k] = dot(row c of v, axis k); equals row-major flatten(V * F^T).
Eigen::VectorXd scalarize(const Eigen::MatrixXd& v, const Mat3& frame);

// Effective per-cell frame matrices. Scalarizing against a mean of frames
// equals the mean of per-frame scalarizations, so each mean is folded into
// one matrix up front.
struct ScalarizerSet {
  std::vector<Mat3> node;  // mean over the node's outgoing edge frames
  std::vector<Mat3> edge;  // the edge's own frame
  std::vector<Mat3> cell;  // mean over boundary-crossing mutual edges
  Mat3 protein;

  const Mat3& at(int rank, int index) const;
};

ScalarizerSet build_scalarizers(const ProteinCC& cc,
                                const std::vector<Vec3>& centered);

}  // namespace pcc
