#pragma once

#include <iosfwd>
#include <string>

#include "pcc/structure.hpp"

namespace pcc {

// Legacy fixed-column format. ATOM records only; HETATM skipped; alternate
// locations resolved to the highest occupancy; model 1 only.
ProteinStructure parse_pdb(std::istream& in, const std::string& source_id);
ProteinStructure parse_pdb_text(const std::string& text,
                                const std::string& source_id = "inline");
ProteinStructure parse_pdb_file(const std::string& path);

// Minimal ATOM/TER/END emitter for the four backbone atoms.
std::string write_pdb(const ProteinStructure& s);

}  // namespace pcc
