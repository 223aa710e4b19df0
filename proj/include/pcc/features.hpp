#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcc/complex.hpp"
#include "pcc/frames.hpp"
#include "pcc/geometry.hpp"
#include "pcc/structure.hpp"

namespace pcc {

inline constexpr std::array<int, 4> kFeatureScalarWidths{70, 17, 28, 47};
inline constexpr std::array<int, 4> kFeatureVectorWidths{3, 1, 14, 23};

// Vector channels are stored one component per matrix: v[k](i, c) is
// component k of channel c on cell i.
template <typename T>
struct BasicRankFeatures {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Mat s;
  std::array<Mat, 3> v;

  int64_t count() const { return s.rows(); }
  int scalar_width() const { return static_cast<int>(s.cols()); }
  int vector_width() const { return static_cast<int>(v[0].cols()); }
};

using RankFeatures = BasicRankFeatures<double>;

struct FeatureSet {
  std::array<RankFeatures, 4> rank;
};

struct FeatureOptions {
  bool with_sequence = true;  // false zeroes the residue-type blocks
  std::string threedi;        // empty zeroes the structural-alphabet block
};

struct DihedralSet {
  std::vector<double> phi, psi, omega;
  std::vector<uint8_t> has_phi, has_psi, has_omega;
};

struct VirtualAngleSet {
  std::vector<double> alpha, kappa;
  std::vector<uint8_t> has_alpha, has_kappa;
};

DihedralSet backbone_dihedrals(const ProteinStructure& s);
VirtualAngleSet virtual_angles(const ProteinStructure& s);

// Unit direction the side chain points from the alpha carbon, zero when the
// backbone atoms needed are missing or degenerate.
Vec3 side_chain_direction(const Residue& r);

// Five descriptors of an eigenvalue triple (descending): linearity,
// planarity, scattering, omnivariance, anisotropy; the extended set appends
// eigenentropy, trace, surface variation.
Eigen::VectorXd shape_descriptors(Vec3 eigenvalues, bool extended);

struct ContactStats {
  double density;  // close pairs (CA under 8 A, separation >= 3) / all pairs
  double order;    // mean sequence separation of close pairs / residue count
};

ContactStats contact_stats(const std::vector<Vec3>& ca);

FeatureSet featurize(const ProteinStructure& s, const ProteinCC& cc,
                     const std::vector<Vec3>& centered,
                     const FeatureOptions& opt = {});

struct PipelineOptions {
  int knn = 16;
  int min_sse = 3;
  bool with_sequence = true;
  std::string sse_override;  // empty: assign from geometry
  std::string threedi;       // empty: absent
};

// Everything downstream consumers need, computed once.
struct Pipeline {
  ProteinStructure structure;
  std::string sse;
  std::string threedi;
  Vec3 com;
  std::vector<Vec3> centered;
  ProteinCC cc;
  FeatureSet features;
  ScalarizerSet scalarizers;
};

Pipeline run_pipeline(ProteinStructure s, const PipelineOptions& opt = {});

}  // namespace pcc
