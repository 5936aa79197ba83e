#ifndef RKFLAB_CHECKPOINT_HPP_
#define RKFLAB_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace rkflab {

struct NamedArray {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<double> data;  // row-major
};

// Versioned binary checkpoint: magic "RKFN", u32 format version, u32 array
// count, then per array u32 name length + name bytes + u32 rank + u32 dims +
// little-endian float64 payload.
void write_checkpoint(const std::string& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_checkpoint(const std::string& path);

}  // namespace rkflab

#endif  // RKFLAB_CHECKPOINT_HPP_
