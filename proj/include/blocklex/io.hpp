#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace blocklex::io {

// Little-endian binary primitives used by the versioned artifact files.
void write_u32(std::ostream& out, uint32_t v);
void write_u64(std::ostream& out, uint64_t v);
void write_f64(std::ostream& out, double v);
void write_varint(std::ostream& out, uint64_t v);
void write_string(std::ostream& out, std::string_view s);

uint32_t read_u32(std::istream& in);
uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
uint64_t read_varint(std::istream& in);
std::string read_string(std::istream& in);

// FNV-1a, used for content-addressed cache keys.
uint64_t fnv1a64(std::string_view bytes, uint64_t state = 1469598103934665603ULL);
uint64_t fnv1a64_u64(uint64_t value, uint64_t state);
uint64_t hash_file(const std::string& path);
std::string hex64(uint64_t v);

// Shortest round-trip decimal text for a double; used everywhere a score is
// written to TSV/CSV so that equal runs produce byte-equal files.
std::string format_double(double v);

// Quotes a CSV field when it contains a comma, quote, or newline.
std::string csv_field(std::string_view s);

}  // namespace blocklex::io
