#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>

#include "s5/checkpoint.hpp"
#include "s5/rng.hpp"

using namespace s5;

namespace {

CheckpointTensor tensor_f64(const std::string& name, const std::vector<std::uint64_t>& dims,
                            std::uint64_t seed) {
    CheckpointTensor t;
    t.name = name;
    t.dtype = 1;
    t.dims = dims;
    Rng rng(seed);
    t.payload.resize(t.element_count() * 8);
    for (std::size_t i = 0; i < t.element_count(); ++i) {
        const double v = rng.next_gaussian();
        std::memcpy(t.payload.data() + 8 * i, &v, 8);
    }
    return t;
}

}  // namespace

TEST_CASE("checkpoint encode/decode round trip is bitwise identical") {
    Checkpoint ckpt;
    ckpt.tensors.push_back(tensor_f64("encoder.w", {4, 3}, 1));
    ckpt.tensors.push_back(tensor_f64("layers.0.lambda", {8}, 2));
    ckpt.tensors.back().dtype = 3;  // complex f64 pairs
    ckpt.tensors.back().dims = {4};
    ckpt.tensors.push_back(tensor_f64("scalar", {}, 3));

    const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);
    const Checkpoint back = decode_checkpoint(bytes);
    const std::vector<std::uint8_t> bytes2 = encode_checkpoint(back);
    CHECK(bytes == bytes2);
    CHECK(back.tensors.size() == 3);
    CHECK(back.tensors[1].dtype == 3);
    CHECK(back.find("scalar") != nullptr);
    CHECK(back.find("missing") == nullptr);

    // File round trip.
    const std::string path = "/tmp/s5_test_ckpt.bin";
    save_checkpoint(ckpt, path);
    const Checkpoint loaded = load_checkpoint(path);
    CHECK(encode_checkpoint(loaded) == bytes);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint header layout is exactly as documented") {
    Checkpoint ckpt;
    CheckpointTensor t;
    t.name = "ab";
    t.dtype = 0;  // f32
    t.dims = {2};
    t.payload = {0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40};  // 1.0f, 2.0f LE
    ckpt.tensors.push_back(t);
    const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);

    CHECK(std::memcmp(bytes.data(), "S5CKPT01", 8) == 0);
    // u32 LE count = 1
    CHECK(bytes[8] == 1);
    CHECK(bytes[9] == 0);
    // u16 LE name length = 2, then "ab"
    CHECK(bytes[12] == 2);
    CHECK(bytes[14] == 'a');
    CHECK(bytes[15] == 'b');
    // dtype, rank, u64 dim = 2
    CHECK(bytes[16] == 0);
    CHECK(bytes[17] == 1);
    CHECK(bytes[18] == 2);
    CHECK(bytes.size() == 8 + 4 + 2 + 2 + 1 + 1 + 8 + 8);
}

TEST_CASE("corrupt checkpoints are rejected with offsets") {
    Checkpoint ckpt;
    ckpt.tensors.push_back(tensor_f64("w", {4}, 5));
    std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);

    std::vector<std::uint8_t> bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS((void)decode_checkpoint(bad_magic), doctest::Contains("magic"),
                         std::runtime_error);

    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 5);
    CHECK_THROWS_WITH_AS((void)decode_checkpoint(truncated), doctest::Contains("truncated"),
                         std::runtime_error);

    std::vector<std::uint8_t> trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_WITH_AS((void)decode_checkpoint(trailing), doctest::Contains("trailing"),
                         std::runtime_error);
}
