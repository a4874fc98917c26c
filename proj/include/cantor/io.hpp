#pragma once

#include <iosfwd>
#include <string>

#include "cantor/construction.hpp"

namespace cantor {

// `.pt` transformation files: "PT v1" then one "- <src> <img>" or
// "+ <src> <img>" line per block, words in text form, sorted shortlex.
std::string serialize_pt(const PartialTransformation& t);
PartialTransformation parse_pt(const std::string& text);

// `.mlt` enumeration files: "MLT v1" then "<stage> <level> <word>" lines.
std::string serialize_mlt(const TestEnumeration& e);
TestEnumeration parse_mlt(const std::string& text);

// Checkpoint: the `.pt` body followed by a "LEDGER v1" section.
std::string serialize_checkpoint(const ConstructionState& st);
ConstructionState parse_checkpoint(const std::string& text);

// Trace CSV: step,average_num,average_den2exp,in_set — the exact average at
// step n is average_num / (2^average_den2exp * (n+1)).
std::string trace_csv(const AverageTrace& trace);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cantor
