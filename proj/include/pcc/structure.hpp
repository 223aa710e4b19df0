#pragma once

#include <string>
#include <vector>

#include "pcc/geometry.hpp"

namespace pcc {

// Residue classes: 0..19 = ACDEFGHIKLMNPQRSTVWY, 20 = unknown (X),
// 21 = ambiguous (B/Z), 22 = gap (-).
inline constexpr int kAaClasses = 23;
inline constexpr int kAaUnknown = 20;
inline constexpr int kAaAmbiguous = 21;
inline constexpr int kAaGap = 22;

// Structural alphabet: the same 20 letters plus X.
inline constexpr int kThreeDiClasses = 21;

int aa_index_from_char(char c);
int aa_index_from_name3(const std::string& name);
char aa_char_from_index(int idx);
std::string aa_name3_from_index(int idx);

int threedi_index_from_char(char c);  // -1 when outside the alphabet

struct Residue {
  std::string chain_id;
  int chain_index = 0;  // 0-based chain number within the structure
  int seq_index = 0;    // 0-based position within the chain
  int auth_seq = 0;     // author-assigned number from the source file
  char insertion = ' ';
  int aa = kAaUnknown;
  Vec3 n = Vec3::Zero(), ca = Vec3::Zero(), c = Vec3::Zero(), o = Vec3::Zero();
  bool has_n = false, has_ca = false, has_c = false, has_o = false;
};

struct ProteinStructure {
  std::vector<Residue> residues;
  std::string source_id;

  int size() const { return static_cast<int>(residues.size()); }
  int num_chains() const;

  bool same_chain(int i, int j) const {
    return residues[i].chain_index == residues[j].chain_index;
  }
  // True when residue i-1 / i+1 exists and belongs to the same chain.
  bool has_prev(int i) const { return i > 0 && same_chain(i - 1, i); }
  bool has_next(int i) const {
    return i + 1 < size() && same_chain(i, i + 1);
  }

  std::vector<Vec3> ca_coords() const;
};

struct AnnotationTrack {
  enum class Kind { Sse3, ThreeDi };
  Kind kind;
  std::string labels;  // one character per residue
};

// One token per line; token count must match the structure.
AnnotationTrack load_annotations(const std::string& text,
                                 AnnotationTrack::Kind kind,
                                 size_t residue_count);

struct ValidationReport {
  std::vector<int> missing_n, missing_c, missing_o;
  // Index i means residues i and i+1 share a chain but their CA atoms are
  // more than 4.5 Angstrom apart.
  std::vector<int> chain_breaks;
  int total_residues = 0;
  int total_chains = 0;

  bool complete() const {
    return missing_n.empty() && missing_c.empty() && missing_o.empty();
  }
};

ValidationReport validate_backbone(const ProteinStructure& s);

}  // namespace pcc
