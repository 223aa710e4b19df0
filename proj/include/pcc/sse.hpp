#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcc/structure.hpp"

namespace pcc {

// Backbone H-bond energy between an acceptor C=O and a donor N-H, kcal/mol.
// Any participating atom pair closer than 0.5 A clamps to -9.9.
double hbond_energy(const Vec3& c_acc, const Vec3& o_acc, const Vec3& n_don,
                    const Vec3& h_don);

// Amide hydrogen positions: N_i + 1.01 * unit(C_{i-1} - O_{i-1}).
// Chain-initial residues and residues with missing prerequisites get none.
std::vector<std::optional<Vec3>> infer_amide_hydrogens(const ProteinStructure& s);

// Per-residue 3-state labels (H/E/C) from backbone H-bond patterns:
// repeated (i, i+4) turns give helices, bridge patterns give strands,
// 3/5-turn helices collapse into H, everything else is C.
// Structures under 5 residues are all C.
std::string assign_sse3(const ProteinStructure& s);

}  // namespace pcc
