#include "s5/train.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <thread>

#include "s5/rng.hpp"

namespace s5 {

namespace {

void parallel_items(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t n_threads = std::min(workers, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += n_threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

std::size_t argmax(const RealVector& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

EpochMetrics train_epoch(ModelParams& model, const ModelConfig& model_cfg, AdamWState& opt,
                         const SequenceBatch& data, const TrainConfig& cfg, std::size_t epoch_index,
                         std::size_t* global_step) {
    if (data.size() == 0) throw std::invalid_argument("train_epoch: empty dataset");

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Fisher-Yates with the per-epoch stream.
    Rng shuffle = Rng(cfg.shuffle_seed).fork("epoch-" + std::to_string(epoch_index));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle.next_u64() % i]);

    EpochMetrics metrics;
    double loss_sum = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t count = std::min(cfg.batch_size, order.size() - start);
        std::vector<ModelGrads> slots;
        slots.reserve(count);
        for (std::size_t i = 0; i < count; ++i) slots.push_back(ModelGrads::zeros_like(model));
        std::vector<double> losses(count, 0.0);
        std::vector<std::size_t> hits(count, 0);

        const double inv_count = 1.0 / static_cast<double>(count);
        parallel_items(count, cfg.workers, [&](std::size_t i) {
            const std::size_t idx = order[start + i];
            const RealVector* intervals =
                data.has_intervals() ? &data.intervals[idx] : nullptr;
            double item_loss = 0.0;
            std::size_t label = data.labels[idx];
            const RealVector logits = model_forward_backward(
                model, model_cfg, data.inputs[idx], intervals,
                [&](const RealVector& lg) {
                    CrossEntropyResult ce = cross_entropy(lg, label);
                    item_loss = ce.loss;
                    for (double& g : ce.d_logits) g *= inv_count;  // batch-mean loss
                    return ce.d_logits;
                },
                slots[i]);
            losses[i] = item_loss;
            hits[i] = argmax(logits) == label ? 1 : 0;
        });

        // Ordered reduction keeps training bitwise reproducible for any
        // worker count.
        ModelGrads& total = slots[0];
        for (std::size_t i = 1; i < count; ++i) total.add(slots[i]);
        opt.step(model, total, *global_step);
        ++*global_step;

        for (std::size_t i = 0; i < count; ++i) {
            loss_sum += losses[i];
            correct += hits[i];
        }
        ++metrics.steps;
    }

    metrics.mean_loss = loss_sum / static_cast<double>(order.size());
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    return metrics;
}

EvalMetrics evaluate(const ModelParams& model, const ModelConfig& model_cfg,
                     const SequenceBatch& data, std::size_t workers) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    std::vector<double> losses(data.size(), 0.0);
    std::vector<std::size_t> hits(data.size(), 0);
    parallel_items(data.size(), workers, [&](std::size_t i) {
        const RealVector* intervals = data.has_intervals() ? &data.intervals[i] : nullptr;
        const RealVector logits = model_forward(model, model_cfg, data.inputs[i], intervals);
        losses[i] = cross_entropy(logits, data.labels[i]).loss;
        hits[i] = argmax(logits) == data.labels[i] ? 1 : 0;
    });
    EvalMetrics out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        out.mean_loss += losses[i];
        out.accuracy += static_cast<double>(hits[i]);
    }
    out.mean_loss /= static_cast<double>(data.size());
    out.accuracy /= static_cast<double>(data.size());
    return out;
}

}  // namespace s5
