#pragma once

#include "snls/field.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace snls {

// Record layout (little-endian): int64 K, float64 L, int64 M, then
// interleaved re/im float64 for k = -K..K.
void write_record(std::ostream& os, const SpectralField& f, int M);
// Returns false at a clean end of stream; throws on a truncated record.
bool read_record(std::istream& is, SpectralField& f, int& M);

void write_records(const std::string& path, const std::vector<SpectralField>& fs, int M);
std::vector<SpectralField> read_records(const std::string& path);

// Columns k,re,im.
void write_csv(std::ostream& os, const SpectralField& f);

} // namespace snls
