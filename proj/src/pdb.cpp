#include "pcc/pdb.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

std::string trimmed(const std::string& s) {
  size_t a = s.find_first_not_of(' ');
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(' ');
  return s.substr(a, b - a + 1);
}

// Fixed-column field; returns "" when the line is too short.
std::string field(const std::string& line, size_t col1, size_t col2) {
  if (line.size() < col1) return "";
  const size_t n = std::min(col2, line.size()) - (col1 - 1);
  return line.substr(col1 - 1, n);
}

double parse_double(const std::string& raw, int line_no, const char* what) {
  const std::string t = trimmed(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw MalformedRecord(line_no, std::string("bad ") + what + " field '" + t + "'");
  return value;
}

int parse_int(const std::string& raw, int line_no, const char* what) {
  const std::string t = trimmed(raw);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw MalformedRecord(line_no, std::string("bad ") + what + " field '" + t + "'");
  return value;
}

struct AtomSlot {
  Vec3 pos = Vec3::Zero();
  double occupancy = -1.0;  // below any real occupancy
  bool present = false;
};

struct RawResidue {
  std::string chain;
  int auth_seq = 0;
  char insertion = ' ';
  std::string name;
  AtomSlot n, ca, c, o;
};

}  // namespace

ProteinStructure parse_pdb(std::istream& in, const std::string& source_id) {
  std::vector<RawResidue> raws;
  std::map<std::tuple<std::string, int, char>, size_t> index;
  std::vector<std::string> chain_order;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string rec = field(line, 1, 6);
    if (rec.rfind("ENDMDL", 0) == 0) break;  // model 1 only
    if (rec != "ATOM  " && rec != "ATOM") continue;

    const std::string atom_name = trimmed(field(line, 13, 16));
    if (atom_name != "N" && atom_name != "CA" && atom_name != "C" &&
        atom_name != "O")
      continue;

    const std::string res_name = trimmed(field(line, 18, 20));
    const std::string chain = field(line, 22, 22);
    const int auth_seq = parse_int(field(line, 23, 26), line_no, "residue number");
    const std::string icode_f = field(line, 27, 27);
    const char icode = icode_f.empty() ? ' ' : icode_f[0];

    Vec3 pos(parse_double(field(line, 31, 38), line_no, "x"),
             parse_double(field(line, 39, 46), line_no, "y"),
             parse_double(field(line, 47, 54), line_no, "z"));
    const std::string occ_f = trimmed(field(line, 55, 60));
    const double occ = occ_f.empty() ? 1.0 : parse_double(occ_f, line_no, "occupancy");

    const auto key = std::make_tuple(chain, auth_seq, icode);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, raws.size()).first;
      RawResidue r;
      r.chain = chain;
      r.auth_seq = auth_seq;
      r.insertion = icode;
      r.name = res_name;
      raws.push_back(std::move(r));
      bool seen = false;
      for (const auto& c0 : chain_order) seen = seen || c0 == chain;
      if (!seen) chain_order.push_back(chain);
    }
    RawResidue& r = raws[it->second];
    AtomSlot* slot = atom_name == "N"    ? &r.n
                     : atom_name == "CA" ? &r.ca
                     : atom_name == "C"  ? &r.c
                                         : &r.o;
    // Alternate locations: keep the highest occupancy, first one on ties.
    if (!slot->present || occ > slot->occupancy) {
      slot->pos = pos;
      slot->occupancy = occ;
      slot->present = true;
    }
  }

  ProteinStructure s;
  s.source_id = source_id;
  for (size_t ci = 0; ci < chain_order.size(); ++ci) {
    int seq = 0;
    for (const auto& raw : raws) {
      if (raw.chain != chain_order[ci] || !raw.ca.present) continue;
      Residue res;
      res.chain_id = raw.chain;
      res.chain_index = static_cast<int>(ci);
      res.seq_index = seq++;
      res.auth_seq = raw.auth_seq;
      res.insertion = raw.insertion;
      res.aa = aa_index_from_name3(raw.name);
      res.n = raw.n.pos;
      res.ca = raw.ca.pos;
      res.c = raw.c.pos;
      res.o = raw.o.pos;
      res.has_n = raw.n.present;
      res.has_ca = true;
      res.has_c = raw.c.present;
      res.has_o = raw.o.present;
      s.residues.push_back(std::move(res));
    }
  }
  if (s.residues.empty())
    throw NoBackbone("no residue with a CA atom in " + source_id);
  return s;
}

ProteinStructure parse_pdb_text(const std::string& text,
                                const std::string& source_id) {
  std::istringstream in(text);
  return parse_pdb(in, source_id);
}

ProteinStructure parse_pdb_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open " + path);
  return parse_pdb(in, path);
}

std::string write_pdb(const ProteinStructure& s) {
  std::string out;
  char buf[96];
  int serial = 1;
  int prev_chain = -1;
  auto emit = [&](const Residue& r, const char* name, const char* element,
                  const Vec3& p) {
    std::snprintf(buf, sizeof buf,
                  "ATOM  %5d %-4s %3s %1s%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n",
                  serial++, name, aa_name3_from_index(r.aa).c_str(),
                  r.chain_id.empty() ? "A" : r.chain_id.c_str(), r.auth_seq,
                  r.insertion, p.x(), p.y(), p.z(), 1.0, 0.0, element);
    out += buf;
  };
  for (const auto& r : s.residues) {
    if (prev_chain >= 0 && r.chain_index != prev_chain) out += "TER\n";
    prev_chain = r.chain_index;
    if (r.has_n) emit(r, " N", " N", r.n);
    if (r.has_ca) emit(r, " CA", " C", r.ca);
    if (r.has_c) emit(r, " C", " C", r.c);
    if (r.has_o) emit(r, " O", " O", r.o);
  }
  out += "TER\nEND\n";
  return out;
}

}  // namespace pcc
