#pragma once

#include <cstdint>
#include <string>

#include "s5/linalg.hpp"

namespace s5 {

// Fixed-length dataset of real-valued sequences with optional per-step
// sampling intervals and integer class labels.
struct SequenceBatch {
    std::size_t length = 0;
    std::size_t features = 0;
    std::vector<RealMatrix> inputs;      // each L x U
    std::vector<RealVector> intervals;   // each L; empty when regularly sampled
    std::vector<std::size_t> labels;

    std::size_t size() const { return inputs.size(); }
    bool has_intervals() const { return !intervals.empty(); }
};

// IDX-format loader (big-endian): images file magic 0x00000803 with u32
// count/rows/cols then bytes; labels file magic 0x00000801 with u32 count
// then bytes. Each image becomes a (rows*cols) x 1 sequence scaled to [0,1].
// limit = 0 loads everything.
SequenceBatch load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                             std::size_t limit = 0);

// Synthetic irregular-sampling task: each item is a sinusoid with a
// class-specific angular frequency (spaced by factor 1.5), a random phase,
// sampled at L sorted uniform-random times in [0, T]; intervals are the
// consecutive time gaps (the first gap is measured from t = 0).
SequenceBatch make_irregular_task(std::uint64_t seed, std::size_t n_items, std::size_t len,
                                  std::size_t classes);

// Angular frequency assigned to each class of make_irregular_task.
double irregular_task_frequency(std::size_t class_index);

}  // namespace s5
