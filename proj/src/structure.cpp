#include "pcc/structure.hpp"

#include <array>
#include <sstream>

namespace pcc {

namespace {

constexpr char kAaLetters[21] = "ACDEFGHIKLMNPQRSTVWY";

struct Name3 {
  const char* name;
  char code;
};

constexpr Name3 kName3Table[] = {
    {"ALA", 'A'}, {"CYS", 'C'}, {"ASP", 'D'}, {"GLU", 'E'}, {"PHE", 'F'},
    {"GLY", 'G'}, {"HIS", 'H'}, {"ILE", 'I'}, {"LYS", 'K'}, {"LEU", 'L'},
    {"MET", 'M'}, {"ASN", 'N'}, {"PRO", 'P'}, {"GLN", 'Q'}, {"ARG", 'R'},
    {"SER", 'S'}, {"THR", 'T'}, {"VAL", 'V'}, {"TRP", 'W'}, {"TYR", 'Y'},
    {"ASX", 'B'}, {"GLX", 'Z'}, {"UNK", 'X'},
};

}  // namespace

int aa_index_from_char(char c) {
  if (c == '-') return kAaGap;
  if (c == 'B' || c == 'Z') return kAaAmbiguous;
  for (int i = 0; i < 20; ++i)
    if (kAaLetters[i] == c) return i;
  return kAaUnknown;
}

int aa_index_from_name3(const std::string& name) {
  for (const auto& e : kName3Table)
    if (name == e.name) return aa_index_from_char(e.code);
  return kAaUnknown;
}

char aa_char_from_index(int idx) {
  if (idx >= 0 && idx < 20) return kAaLetters[idx];
  if (idx == kAaAmbiguous) return 'B';
  if (idx == kAaGap) return '-';
  return 'X';
}

std::string aa_name3_from_index(int idx) {
  const char c = aa_char_from_index(idx);
  for (const auto& e : kName3Table)
    if (e.code == c) return e.name;
  return "UNK";
}

int threedi_index_from_char(char c) {
  for (int i = 0; i < 20; ++i)
    if (kAaLetters[i] == c) return i;
  if (c == 'X') return 20;
  return -1;
}

int ProteinStructure::num_chains() const {
  return residues.empty() ? 0 : residues.back().chain_index + 1;
}

std::vector<Vec3> ProteinStructure::ca_coords() const {
  std::vector<Vec3> out;
  out.reserve(residues.size());
  for (const auto& r : residues) out.push_back(r.ca);
  return out;
}

AnnotationTrack load_annotations(const std::string& text,
                                 AnnotationTrack::Kind kind,
                                 size_t residue_count) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    size_t start = line.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    tokens.push_back(line.substr(start));
  }
  if (tokens.size() != residue_count)
    throw LengthMismatch("annotation has " + std::to_string(tokens.size()) +
                         " labels for " + std::to_string(residue_count) +
                         " residues");
  AnnotationTrack track;
  track.kind = kind;
  track.labels.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.size() != 1)
      throw UnknownSymbol("label token '" + t + "' is not a single symbol");
    const char c = t[0];
    const bool ok = kind == AnnotationTrack::Kind::Sse3
                        ? (c == 'H' || c == 'E' || c == 'C')
                        : threedi_index_from_char(c) >= 0;
    if (!ok) throw UnknownSymbol(std::string("label '") + c + "' outside alphabet");
    track.labels.push_back(c);
  }
  return track;
}

ValidationReport validate_backbone(const ProteinStructure& s) {
  ValidationReport rep;
  rep.total_residues = s.size();
  rep.total_chains = s.num_chains();
  for (int i = 0; i < s.size(); ++i) {
    const Residue& r = s.residues[i];
    if (!r.has_n) rep.missing_n.push_back(i);
    if (!r.has_c) rep.missing_c.push_back(i);
    if (!r.has_o) rep.missing_o.push_back(i);
    if (s.has_next(i) && (s.residues[i + 1].ca - r.ca).norm() > 4.5)
      rep.chain_breaks.push_back(i);
  }
  return rep;
}

}  // namespace pcc
