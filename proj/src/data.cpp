#include "s5/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "s5/rng.hpp"

namespace s5 {

namespace {

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path, std::size_t offset) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        throw std::runtime_error(path + ": truncated at offset " + std::to_string(offset));
    return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

}  // namespace

SequenceBatch load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                             std::size_t limit) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw std::runtime_error("load_mnist_idx: cannot open " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw std::runtime_error("load_mnist_idx: cannot open " + labels_path);

    const std::uint32_t image_magic = read_u32_be(images, images_path, 0);
    if (image_magic != 0x00000803)
        throw std::runtime_error(images_path + ": bad magic number at offset 0 (expected 0x00000803)");
    const std::uint32_t n_images = read_u32_be(images, images_path, 4);
    const std::uint32_t rows = read_u32_be(images, images_path, 8);
    const std::uint32_t cols = read_u32_be(images, images_path, 12);

    const std::uint32_t label_magic = read_u32_be(labels, labels_path, 0);
    if (label_magic != 0x00000801)
        throw std::runtime_error(labels_path + ": bad magic number at offset 0 (expected 0x00000801)");
    const std::uint32_t n_labels = read_u32_be(labels, labels_path, 4);
    if (n_images != n_labels)
        throw std::runtime_error("load_mnist_idx: image/label counts differ (" +
                                 std::to_string(n_images) + " vs " + std::to_string(n_labels) + ")");

    const std::size_t count = limit == 0 ? n_images : std::min<std::size_t>(limit, n_images);
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

    SequenceBatch batch;
    batch.length = pixels;
    batch.features = 1;
    batch.inputs.reserve(count);
    batch.labels.reserve(count);
    std::vector<unsigned char> buf(pixels);
    for (std::size_t i = 0; i < count; ++i) {
        if (!images.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
            throw std::runtime_error(images_path + ": truncated at offset " +
                                     std::to_string(16 + i * pixels));
        RealMatrix seq(pixels, 1);
        for (std::size_t p = 0; p < pixels; ++p) seq.data[p] = static_cast<double>(buf[p]) / 255.0;
        batch.inputs.push_back(std::move(seq));
        char lab;
        if (!labels.read(&lab, 1))
            throw std::runtime_error(labels_path + ": truncated at offset " + std::to_string(8 + i));
        const auto value = static_cast<unsigned char>(lab);
        if (value > 9)
            throw std::runtime_error(labels_path + ": label out of range at item " + std::to_string(i));
        batch.labels.push_back(value);
    }
    return batch;
}

double irregular_task_frequency(std::size_t class_index) {
    // Base 4 rad/s, spaced by the factor 1.5 so classes stay separable.
    return 4.0 * std::pow(1.5, static_cast<double>(class_index));
}

SequenceBatch make_irregular_task(std::uint64_t seed, std::size_t n_items, std::size_t len,
                                  std::size_t classes) {
    if (classes < 2) throw std::invalid_argument("make_irregular_task: need at least 2 classes");
    if (len == 0 || n_items == 0)
        throw std::invalid_argument("make_irregular_task: n_items and L must be >= 1");

    constexpr double t_final = 10.0;
    SequenceBatch batch;
    batch.length = len;
    batch.features = 1;
    Rng root(seed);
    for (std::size_t item = 0; item < n_items; ++item) {
        Rng rng = root.fork(item);
        const std::size_t label = item % classes;
        const double omega = irregular_task_frequency(label);
        const double phase = rng.next_uniform(0.0, 2.0 * std::numbers::pi);

        RealVector times(len);
        for (double& t : times) t = rng.next_uniform(0.0, t_final);
        std::sort(times.begin(), times.end());

        RealMatrix seq(len, 1);
        RealVector gaps(len);
        double prev = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            seq.data[k] = std::sin(omega * times[k] + phase);
            gaps[k] = times[k] - prev;
            prev = times[k];
        }
        batch.inputs.push_back(std::move(seq));
        batch.intervals.push_back(std::move(gaps));
        batch.labels.push_back(label);
    }
    return batch;
}

}  // namespace s5
