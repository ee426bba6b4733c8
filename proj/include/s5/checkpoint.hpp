#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace s5 {

// Named-tensor container with a bit-exact binary layout:
//   magic "S5CKPT01" (8 bytes)
//   u32 LE tensor count
//   per tensor: u16 LE name length, UTF-8 name, u8 dtype, u8 rank,
//               rank x u64 LE dims, row-major little-endian payload.
// dtype codes: 0 = f32, 1 = f64, 2 = complex-f32 pairs, 3 = complex-f64 pairs.
struct CheckpointTensor {
    std::string name;
    std::uint8_t dtype = 1;
    std::vector<std::uint64_t> dims;
    std::vector<std::uint8_t> payload;  // raw little-endian bytes

    std::size_t element_count() const;
};

struct Checkpoint {
    std::vector<CheckpointTensor> tensors;

    const CheckpointTensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// In-memory encode/decode (save/load are thin file wrappers).
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace s5
