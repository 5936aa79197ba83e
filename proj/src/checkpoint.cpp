#include "rkflab/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "rkflab/errors.hpp"

namespace rkflab {

namespace {

constexpr char kMagic[4] = {'R', 'K', 'F', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t x) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return x;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::vector<NamedArray>& arrays) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("write_checkpoint: cannot open " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(arrays.size()));
  for (const NamedArray& a : arrays) {
    put_u32(out, static_cast<std::uint32_t>(a.name.size()));
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put_u32(out, static_cast<std::uint32_t>(a.shape.size()));
    std::size_t count = 1;
    for (std::uint32_t d : a.shape) {
      put_u32(out, d);
      count *= d;
    }
    if (count != a.data.size()) throw DimensionMismatch("write_checkpoint: shape/data mismatch");
    for (double x : a.data) put_f64(out, x);
  }
  if (!out) throw ConfigError("write_checkpoint: write failed for " + path);
}

std::vector<NamedArray> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("read_checkpoint: bad magic in " + path);
  if (get_u32(in) != kVersion) throw ConfigError("read_checkpoint: unsupported version");
  const std::uint32_t count = get_u32(in);
  std::vector<NamedArray> arrays;
  arrays.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const std::uint32_t name_len = get_u32(in);
    a.name.resize(name_len);
    in.read(a.name.data(), name_len);
    const std::uint32_t rank = get_u32(in);
    std::size_t total = 1;
    a.shape.resize(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      a.shape[d] = get_u32(in);
      total *= a.shape[d];
    }
    a.data.resize(total);
    for (std::size_t k = 0; k < total; ++k) a.data[k] = get_f64(in);
    if (!in) throw ConfigError("read_checkpoint: truncated file " + path);
    arrays.push_back(std::move(a));
  }
  return arrays;
}

}  // namespace rkflab
