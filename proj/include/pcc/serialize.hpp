#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcc/complex.hpp"
#include "pcc/features.hpp"
#include "pcc/tcpnet.hpp"

namespace pcc {

// Parameter blob: magic "TCPN", version, canonical text header, then every
// weight array as little-endian f64 in declaration order.
std::vector<uint8_t> params_to_bytes(const ModelParams& p);
ModelParams params_from_bytes(const std::vector<uint8_t>& bytes);
void save_params(const std::string& path, const ModelParams& p);
ModelParams load_params(const std::string& path);

// Featurized-complex bundle: magic "PCC1", version, text header, coordinates,
// labels, cells, edges, neighborhood matrices, and the four feature blocks.
struct Bundle {
  std::string source_id;
  int knn = 16;
  int min_sse = 3;
  bool sequence_withheld = false;
  bool sse_from_file = false;
  std::string sse;      // one label per residue
  std::string threedi;  // empty when absent
  std::vector<Vec3> centered;
  std::vector<Edge> edges;
  std::vector<SseCell> cells;
  std::vector<SparseInt> matrices;  // kBundleMatrixNames order
  FeatureSet features;
};

inline constexpr std::array<const char*, 7> kBundleMatrixNames{
    "incidence_0_1",  "incidence_1_0",    "incidence_2_0", "incidence_2_1",
    "outer_leaving",  "outer_entering_t", "intersection"};

Bundle bundle_from_pipeline(const Pipeline& pipe, const PipelineOptions& opt);

std::vector<uint8_t> bundle_to_bytes(const Bundle& b);
Bundle bundle_from_bytes(const std::vector<uint8_t>& bytes);
void save_bundle(const std::string& path, const Bundle& b);
Bundle load_bundle(const std::string& path);

// Rebuild the complex from the bundle's edges and cells and verify the stored
// matrices match it.
ProteinCC rebuild_cc(const Bundle& b);

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_atomic(const std::string& path,
                       const std::vector<uint8_t>& bytes);

}  // namespace pcc
