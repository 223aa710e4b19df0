#pragma once

#include <array>
#include <vector>

#include "pcc/structure.hpp"

namespace pcc {

// Synthetic single-chain backbones grown from ideal bond geometry and a
// per-residue (phi, psi) list. Residue 0's phi is unused.
ProteinStructure make_chain(const std::vector<std::array<double, 2>>& phipsi,
                            char aa = 'A', const std::string& chain_id = "A");

ProteinStructure make_helix(int n, char aa = 'A');   // phi -57, psi -47
ProteinStructure make_strand(int n, char aa = 'A');  // phi -139, psi 135

// Random coil torsions drawn from broad backbone-allowed ranges.
ProteinStructure make_coil(int n, Rng& rng);

// Random alternation of helix / strand / coil segments, n residues total.
ProteinStructure make_mixed(int n, Rng& rng);

// Single chain: strand, short loop, antiparallel return strand. The return
// strand is a rigid image of the first, placed for cross-strand H-bonding.
ProteinStructure make_hairpin(int per_strand = 8, int loop_len = 3);

// The two paired strands of the hairpin geometry as separate chains A and B.
ProteinStructure make_strand_pair(int per_strand = 8);

// Merge structures as consecutive chains labeled A, B, C, ...
ProteinStructure concat_chains(const std::vector<ProteinStructure>& parts);

// Rigid motion / mirror applied to every atom.
ProteinStructure transformed(const ProteinStructure& s, const Mat3& r,
                             const Vec3& t);
ProteinStructure mirrored_x(const ProteinStructure& s);

}  // namespace pcc
