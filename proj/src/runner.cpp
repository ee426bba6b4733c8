#include "s5/runner.hpp"

#include <cstring>
#include <sstream>
#include <stdexcept>

#include "s5/rng.hpp"

namespace s5 {

namespace {

Discretization parse_mode(const std::string& name) {
    if (name == "zoh") return Discretization::Zoh;
    if (name == "bilinear") return Discretization::Bilinear;
    return Discretization::DirectDiscrete;
}

CheckpointTensor real_tensor(const std::string& name, const std::vector<std::uint64_t>& dims,
                             const double* data, std::size_t count) {
    CheckpointTensor t;
    t.name = name;
    t.dtype = 1;
    t.dims = dims;
    t.payload.resize(count * 8);
    std::memcpy(t.payload.data(), data, count * 8);
    return t;
}

CheckpointTensor complex_tensor(const std::string& name, const std::vector<std::uint64_t>& dims,
                                const cplx* data, std::size_t count) {
    CheckpointTensor t;
    t.name = name;
    t.dtype = 3;
    t.dims = dims;
    t.payload.resize(count * 16);
    std::memcpy(t.payload.data(), data, count * 16);
    return t;
}

void fill_real(const Checkpoint& ckpt, const std::string& name, double* data, std::size_t count) {
    const CheckpointTensor* t = ckpt.find(name);
    if (!t) throw std::runtime_error("checkpoint: missing tensor " + name);
    if (t->dtype != 1 || t->element_count() != count)
        throw std::runtime_error("checkpoint: shape/dtype mismatch for tensor " + name);
    std::memcpy(data, t->payload.data(), count * 8);
}

void fill_complex(const Checkpoint& ckpt, const std::string& name, cplx* data, std::size_t count) {
    const CheckpointTensor* t = ckpt.find(name);
    if (!t) throw std::runtime_error("checkpoint: missing tensor " + name);
    if (t->dtype != 3 || t->element_count() != count)
        throw std::runtime_error("checkpoint: shape/dtype mismatch for tensor " + name);
    std::memcpy(data, t->payload.data(), count * 16);
}

}  // namespace

Checkpoint model_to_checkpoint(const ModelParams& model) {
    Checkpoint ckpt;
    auto& ts = ckpt.tensors;
    ts.push_back(real_tensor("encoder.w", {model.encoder_w.rows, model.encoder_w.cols},
                             model.encoder_w.data.data(), model.encoder_w.data.size()));
    ts.push_back(real_tensor("encoder.b", {model.encoder_b.size()}, model.encoder_b.data(),
                             model.encoder_b.size()));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const S5LayerParams& layer = model.layers[l];
        const std::string prefix = "layers." + std::to_string(l) + ".";
        ts.push_back(complex_tensor(prefix + "lambda", {layer.ssm.lambda.size()},
                                    layer.ssm.lambda.data(), layer.ssm.lambda.size()));
        ts.push_back(complex_tensor(prefix + "b_tilde",
                                    {layer.ssm.b_tilde.rows, layer.ssm.b_tilde.cols},
                                    layer.ssm.b_tilde.data.data(), layer.ssm.b_tilde.data.size()));
        ts.push_back(complex_tensor(prefix + "c_tilde",
                                    {layer.ssm.c_tilde.rows, layer.ssm.c_tilde.cols},
                                    layer.ssm.c_tilde.data.data(), layer.ssm.c_tilde.data.size()));
        ts.push_back(real_tensor(prefix + "d", {layer.ssm.d.size()}, layer.ssm.d.data(),
                                 layer.ssm.d.size()));
        ts.push_back(real_tensor(prefix + "log_delta", {layer.ssm.log_delta.size()},
                                 layer.ssm.log_delta.data(), layer.ssm.log_delta.size()));
        ts.push_back(real_tensor(prefix + "w_gate", {layer.w_gate.rows, layer.w_gate.cols},
                                 layer.w_gate.data.data(), layer.w_gate.data.size()));
        ts.push_back(real_tensor(prefix + "norm_scale", {layer.norm_scale.size()},
                                 layer.norm_scale.data(), layer.norm_scale.size()));
        ts.push_back(real_tensor(prefix + "norm_bias", {layer.norm_bias.size()},
                                 layer.norm_bias.data(), layer.norm_bias.size()));
    }
    ts.push_back(real_tensor("decoder.w", {model.decoder_w.rows, model.decoder_w.cols},
                             model.decoder_w.data.data(), model.decoder_w.data.size()));
    ts.push_back(real_tensor("decoder.b", {model.decoder_b.size()}, model.decoder_b.data(),
                             model.decoder_b.size()));
    return ckpt;
}

void model_from_checkpoint(ModelParams& model, const Checkpoint& ckpt) {
    fill_real(ckpt, "encoder.w", model.encoder_w.data.data(), model.encoder_w.data.size());
    fill_real(ckpt, "encoder.b", model.encoder_b.data(), model.encoder_b.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        S5LayerParams& layer = model.layers[l];
        const std::string prefix = "layers." + std::to_string(l) + ".";
        fill_complex(ckpt, prefix + "lambda", layer.ssm.lambda.data(), layer.ssm.lambda.size());
        fill_complex(ckpt, prefix + "b_tilde", layer.ssm.b_tilde.data.data(),
                     layer.ssm.b_tilde.data.size());
        fill_complex(ckpt, prefix + "c_tilde", layer.ssm.c_tilde.data.data(),
                     layer.ssm.c_tilde.data.size());
        fill_real(ckpt, prefix + "d", layer.ssm.d.data(), layer.ssm.d.size());
        fill_real(ckpt, prefix + "log_delta", layer.ssm.log_delta.data(),
                  layer.ssm.log_delta.size());
        fill_real(ckpt, prefix + "w_gate", layer.w_gate.data.data(), layer.w_gate.data.size());
        fill_real(ckpt, prefix + "norm_scale", layer.norm_scale.data(), layer.norm_scale.size());
        fill_real(ckpt, prefix + "norm_bias", layer.norm_bias.data(), layer.norm_bias.size());
    }
    fill_real(ckpt, "decoder.w", model.decoder_w.data.data(), model.decoder_w.data.size());
    fill_real(ckpt, "decoder.b", model.decoder_b.data(), model.decoder_b.size());
}

RunSetup build_run(const RunConfig& cfg) {
    RunSetup setup;
    std::size_t input_dim = 1;
    std::size_t classes = 10;
    if (cfg.dataset == "mnist") {
        if (cfg.train_images.empty() || cfg.train_labels.empty())
            throw std::runtime_error("config: mnist dataset needs train_images/train_labels paths");
        setup.train_data = load_mnist_idx(cfg.train_images, cfg.train_labels, cfg.train_limit);
        if (!cfg.test_images.empty())
            setup.test_data = load_mnist_idx(cfg.test_images, cfg.test_labels, cfg.test_limit);
        classes = 10;
    } else {
        classes = cfg.irregular_classes;
        setup.train_data = make_irregular_task(cfg.seed, cfg.irregular_items,
                                               cfg.irregular_length, classes);
        // Held-out items come from a disjoint stream.
        const std::size_t n_test = std::max<std::size_t>(cfg.irregular_items / 2, classes);
        setup.test_data = make_irregular_task(Rng(cfg.seed).fork("test-items").next_u64(), n_test,
                                              cfg.irregular_length, classes);
        if (cfg.test_limit > 0 && cfg.test_limit < setup.test_data.size()) {
            setup.test_data.inputs.resize(cfg.test_limit);
            setup.test_data.intervals.resize(cfg.test_limit);
            setup.test_data.labels.resize(cfg.test_limit);
        }
    }

    HippoSpec spec;
    spec.blocks = cfg.blocks;
    spec.conj_sym = cfg.conj_sym;
    spec.delta_min = cfg.delta_min;
    spec.delta_max = cfg.delta_max;
    setup.model_cfg.layer.bidirectional = cfg.bidirectional;
    setup.model_cfg.layer.discretization = parse_mode(cfg.discretization);
    setup.model_cfg.layer.prenorm = cfg.prenorm;
    setup.model_cfg.layer.conj_sym = cfg.conj_sym;
    setup.model_cfg.seed = cfg.seed;
    setup.model = init_model(input_dim, cfg.features, cfg.state_size, cfg.depth, classes, spec,
                             cfg.seed, cfg.bidirectional);

    setup.opt_cfg.lr = cfg.lr;
    setup.opt_cfg.ssm_lr = cfg.ssm_lr;
    setup.opt_cfg.weight_decay = cfg.weight_decay;
    setup.opt_cfg.epochs = cfg.epochs;
    setup.opt_cfg.warmup = cfg.warmup;
    const std::size_t steps_per_epoch = (setup.train_data.size() + cfg.batch - 1) / cfg.batch;
    setup.opt_cfg.total_steps = std::max<std::size_t>(1, steps_per_epoch * cfg.epochs);
    setup.opt_cfg.groups.b_tilde_in_global_group = cfg.wd_on_b_tilde;
    setup.opt_cfg.groups.c_tilde_in_ssm_group = cfg.c_tilde_in_ssm_group;
    return setup;
}

RunResult run_training(const RunConfig& cfg) {
    RunSetup setup = build_run(cfg);
    AdamWState opt(setup.model, setup.opt_cfg);
    TrainConfig tc;
    tc.batch_size = cfg.batch;
    tc.workers = cfg.workers;
    tc.shuffle_seed = Rng(cfg.seed).fork("shuffle").next_u64();

    std::ostringstream csv;
    csv << "epoch,step,loss,accuracy,lr\n";
    RunResult result;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const EpochMetrics m =
            train_epoch(setup.model, setup.model_cfg, opt, setup.train_data, tc, epoch, &step);
        const double lr_now = cfg.lr * schedule_factor(step > 0 ? step - 1 : 0, setup.opt_cfg);
        csv << epoch << ',' << step << ',' << m.mean_loss << ',' << m.accuracy << ',' << lr_now
            << '\n';
        result.final_train_loss = m.mean_loss;
        result.final_train_accuracy = m.accuracy;
    }
    if (setup.test_data.size() > 0) {
        const EvalMetrics ev = evaluate(setup.model, setup.model_cfg, setup.test_data, cfg.workers);
        result.test_loss = ev.mean_loss;
        result.test_accuracy = ev.accuracy;
    }
    result.metrics_csv = csv.str();
    result.checkpoint = model_to_checkpoint(setup.model);
    return result;
}

}  // namespace s5
