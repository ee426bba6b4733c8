#include "s5/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace s5 {

double cosine_factor(std::size_t step, std::size_t total_steps) {
    if (total_steps <= 1) return step == 0 ? 1.0 : 0.0;
    const double t = static_cast<double>(std::min(step, total_steps - 1)) /
                     static_cast<double>(total_steps - 1);
    return 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

double schedule_factor(std::size_t step, const OptimizerConfig& cfg) {
    if (step < cfg.warmup)
        return static_cast<double>(step + 1) / static_cast<double>(cfg.warmup);
    const std::size_t decay_steps = cfg.total_steps > cfg.warmup ? cfg.total_steps - cfg.warmup : 1;
    return cosine_factor(step - cfg.warmup, decay_steps);
}

AdamWState::AdamWState(ModelParams& params, const OptimizerConfig& cfg) : cfg_(cfg) {
    std::size_t total = 0;
    for_each_param(params, nullptr, cfg.groups, [&](const ParamRef& ref) { total += ref.size; });
    m_.assign(total, 0.0);
    v_.assign(total, 0.0);
}

void AdamWState::step(ModelParams& params, ModelGrads& grads, std::size_t step_index) {
    ++t_;
    const double factor = schedule_factor(step_index, cfg_);
    const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

    std::size_t offset = 0;
    for_each_param(params, &grads, cfg_.groups, [&](const ParamRef& ref) {
        if (offset + ref.size > m_.size())
            throw std::runtime_error("adamw: state size mismatch (model shape changed?)");
        const bool ssm = ref.group == ParamGroup::Ssm;
        const double lr = factor * (ssm ? cfg_.ssm_lr : cfg_.lr);
        const double wd = ssm ? 0.0 : cfg_.weight_decay;
        double* m = m_.data() + offset;
        double* v = v_.data() + offset;
        for (std::size_t i = 0; i < ref.size; ++i) {
            const double g = ref.grads[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            ref.values[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps) + wd * ref.values[i]);
        }
        offset += ref.size;
    });
}

}  // namespace s5
