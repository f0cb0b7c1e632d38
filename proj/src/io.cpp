#include "blocklex/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "blocklex/error.hpp"

namespace blocklex::io {

namespace {

void put_bytes(std::ostream& out, const unsigned char* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!out) Error::data("write failed");
}

void get_bytes(std::istream& in, unsigned char* p, size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) Error::data("unexpected end of file");
}

}  // namespace

void write_u32(std::ostream& out, uint32_t v) {
  std::array<unsigned char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b.data(), b.size());
}

void write_u64(std::ostream& out, uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b.data(), b.size());
}

void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  write_u64(out, bits);
}

void write_varint(std::ostream& out, uint64_t v) {
  unsigned char buf[10];
  size_t n = 0;
  do {
    unsigned char byte = v & 0x7f;
    v >>= 7;
    if (v) byte |= 0x80;
    buf[n++] = byte;
  } while (v);
  put_bytes(out, buf, n);
}

void write_string(std::ostream& out, std::string_view s) {
  write_varint(out, s.size());
  if (!s.empty()) put_bytes(out, reinterpret_cast<const unsigned char*>(s.data()), s.size());
}

uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b;
  get_bytes(in, b.data(), b.size());
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> b;
  get_bytes(in, b.data(), b.size());
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

uint64_t read_varint(std::istream& in) {
  uint64_t v = 0;
  int shift = 0;
  for (;;) {
    unsigned char byte;
    get_bytes(in, &byte, 1);
    if (shift >= 64) Error::data("varint overflow");
    v |= static_cast<uint64_t>(byte & 0x7f) << shift;
    if (!(byte & 0x80)) break;
    shift += 7;
  }
  return v;
}

std::string read_string(std::istream& in) {
  const uint64_t n = read_varint(in);
  if (n > (1u << 24)) Error::data("string length out of range");
  std::string s(n, '\0');
  if (n) get_bytes(in, reinterpret_cast<unsigned char*>(s.data()), n);
  return s;
}

uint64_t fnv1a64(std::string_view bytes, uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 1099511628211ULL;
  }
  return state;
}

uint64_t fnv1a64_u64(uint64_t value, uint64_t state) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(value >> (8 * i));
  return fnv1a64(std::string_view(buf, 8), state);
}

uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::data("cannot open file: " + path);
  uint64_t state = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    state = fnv1a64(std::string_view(buf, static_cast<size_t>(in.gcount())), state);
  }
  return state;
}

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) Error::numeric("double formatting failed");
  return std::string(buf, ptr);
}

std::string csv_field(std::string_view s) {
  bool needs_quotes = false;
  for (char c : s) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs_quotes = true;
      break;
    }
  }
  if (!needs_quotes) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace blocklex::io
