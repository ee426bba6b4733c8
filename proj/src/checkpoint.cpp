#include "s5/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace s5 {

namespace {

constexpr char kMagic[8] = {'S', '5', 'C', 'K', 'P', 'T', '0', '1'};

std::size_t dtype_size(std::uint8_t dtype) {
    switch (dtype) {
        case 0: return 4;   // f32
        case 1: return 8;   // f64
        case 2: return 8;   // complex f32 pair
        case 3: return 16;  // complex f64 pair
        default: throw std::runtime_error("checkpoint: unknown dtype code " + std::to_string(dtype));
    }
}

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T read_le(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    if (pos + sizeof(T) > bytes.size())
        throw std::runtime_error("checkpoint: truncated at offset " + std::to_string(pos));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(bytes[pos + i]) << (8 * i);
    pos += sizeof(T);
    return value;
}

}  // namespace

std::size_t CheckpointTensor::element_count() const {
    std::size_t n = 1;
    for (std::uint64_t d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

const CheckpointTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        if (t.name.size() > 0xFFFF) throw std::runtime_error("checkpoint: tensor name too long");
        append_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
        out.insert(out.end(), t.name.begin(), t.name.end());
        out.push_back(t.dtype);
        out.push_back(static_cast<std::uint8_t>(t.dims.size()));
        for (std::uint64_t d : t.dims) append_le<std::uint64_t>(out, d);
        if (t.payload.size() != t.element_count() * dtype_size(t.dtype))
            throw std::runtime_error("checkpoint: payload size mismatch for tensor " + t.name);
        out.insert(out.end(), t.payload.begin(), t.payload.end());
    }
    return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic at offset 0");
    pos = 8;
    const auto count = read_le<std::uint32_t>(bytes, pos);
    Checkpoint ckpt;
    ckpt.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointTensor t;
        const auto name_len = read_le<std::uint16_t>(bytes, pos);
        if (pos + name_len > bytes.size())
            throw std::runtime_error("checkpoint: truncated name at offset " + std::to_string(pos));
        t.name.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + name_len));
        pos += name_len;
        t.dtype = read_le<std::uint8_t>(bytes, pos);
        dtype_size(t.dtype);  // validates
        const auto rank = read_le<std::uint8_t>(bytes, pos);
        t.dims.resize(rank);
        for (auto& d : t.dims) d = read_le<std::uint64_t>(bytes, pos);
        const std::size_t payload_size = t.element_count() * dtype_size(t.dtype);
        if (pos + payload_size > bytes.size())
            throw std::runtime_error("checkpoint: truncated payload for tensor " + t.name +
                                     " at offset " + std::to_string(pos));
        t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + payload_size));
        pos += payload_size;
        ckpt.tensors.push_back(std::move(t));
    }
    if (pos != bytes.size())
        throw std::runtime_error("checkpoint: trailing bytes at offset " + std::to_string(pos));
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace s5
