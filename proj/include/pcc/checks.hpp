#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcc/complex.hpp"
#include "pcc/geometry.hpp"

namespace pcc {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Small random complex for oracle tests: nodes from a noisy point cloud,
// 2-cells from a random label string, capped at max_cells.
ProteinCC random_complex(Rng& rng, int max_nodes, int max_cells);

// Scalars invariant / vectors covariant under rigid motions, at feature level
// and through the full network; mirror images must separate.
CheckResult features_equivariant(uint64_t seed, int proteins, int motions);
CheckResult forward_equivariant(uint64_t seed, int proteins, int motions,
                                int layers);
CheckResult perceptron_equivariant(uint64_t seed, int trials);
CheckResult reflection_sensitive(uint64_t seed, int param_seeds, int layers);

// Neighborhood matrices against brute-force set definitions, and the
// Laplacian / degree / adjacency identities, all in exact integers.
CheckResult neighborhoods_exact(uint64_t seed, int complexes);
// Every neighborhood mean consumed by the update steps against an
// independent triplet-loop accumulation, bit for bit.
CheckResult aggregation_matches_loops(uint64_t seed, int complexes);

CheckResult frames_well_formed(uint64_t seed, int trials);
CheckResult shape_analytic();
CheckResult dihedral_antisymmetric(uint64_t seed, int quadruples);

CheckResult feature_widths_match();
CheckResult embedding_widths_match();
CheckResult helix_labels();
CheckResult hairpin_labels();

CheckResult params_deterministic(uint64_t seed);
CheckResult forward_deterministic(uint64_t seed);

struct BenchReport {
  double featurize_ms = 0;  // parse-free: featurize + complex build
  double forward_ms = 0;    // one full forward pass
};

BenchReport time_pipeline(int residues, uint64_t seed, int layers);

// suite: equivariance | algebra | geometry | all. trials <= 0 picks each
// suite's default volume.
std::vector<CheckResult> run_suite(const std::string& suite, uint64_t seed,
                                   int trials);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace pcc
