#include "s5/model.hpp"

#include <cmath>
#include <stdexcept>

#include "s5/rng.hpp"

namespace s5 {

ModelGrads ModelGrads::zeros_like(const ModelParams& params) {
    ModelGrads g;
    g.d_encoder_w = RealMatrix(params.encoder_w.rows, params.encoder_w.cols);
    g.d_encoder_b.assign(params.encoder_b.size(), 0.0);
    g.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) g.layers.push_back(LayerGrads::zeros_like(layer));
    g.d_decoder_w = RealMatrix(params.decoder_w.rows, params.decoder_w.cols);
    g.d_decoder_b.assign(params.decoder_b.size(), 0.0);
    return g;
}

void ModelGrads::add(const ModelGrads& other) {
    for (std::size_t i = 0; i < d_encoder_w.data.size(); ++i)
        d_encoder_w.data[i] += other.d_encoder_w.data[i];
    for (std::size_t i = 0; i < d_encoder_b.size(); ++i) d_encoder_b[i] += other.d_encoder_b[i];
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].add(other.layers[i]);
    for (std::size_t i = 0; i < d_decoder_w.data.size(); ++i)
        d_decoder_w.data[i] += other.d_decoder_w.data[i];
    for (std::size_t i = 0; i < d_decoder_b.size(); ++i) d_decoder_b[i] += other.d_decoder_b[i];
}

ModelParams init_model(std::size_t input_dim, std::size_t feature_dim, std::size_t state_size,
                       std::size_t depth, std::size_t classes, const HippoSpec& ssm_spec,
                       std::uint64_t seed, bool bidirectional) {
    if (depth == 0) throw std::invalid_argument("init_model: depth must be >= 1");
    Rng root(seed);
    ModelParams model;
    model.encoder_w = RealMatrix(feature_dim, input_dim);
    model.encoder_b.assign(feature_dim, 0.0);
    Rng rng_enc = root.fork("encoder");
    const double enc_sigma = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double& x : model.encoder_w.data) x = enc_sigma * rng_enc.next_gaussian();

    for (std::size_t l = 0; l < depth; ++l) {
        HippoSpec spec = ssm_spec;
        spec.feature_size = feature_dim;
        spec.state_size = state_size;
        spec.bidirectional = bidirectional;
        spec.seed = root.fork("layer-" + std::to_string(l)).next_u64();
        S5LayerParams layer;
        layer.ssm = init_continuous_ssm(spec);
        // Zero gate (sigma(0) = 1/2 keeps early activations tame); identity norm.
        layer.w_gate = RealMatrix(feature_dim, feature_dim);
        layer.norm_scale.assign(feature_dim, 1.0);
        layer.norm_bias.assign(feature_dim, 0.0);
        model.layers.push_back(std::move(layer));
    }

    model.decoder_w = RealMatrix(classes, feature_dim);
    model.decoder_b.assign(classes, 0.0);
    Rng rng_dec = root.fork("decoder");
    const double dec_sigma = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    for (double& x : model.decoder_w.data) x = dec_sigma * rng_dec.next_gaussian();
    return model;
}

namespace {

RealMatrix encode(const ModelParams& model, const RealMatrix& item) {
    const std::size_t feats = model.feature_dim();
    const std::size_t in_dim = model.input_dim();
    if (item.cols != in_dim) throw std::invalid_argument("model: item feature width mismatch");
    RealMatrix e(item.rows, feats);
    for (std::size_t k = 0; k < item.rows; ++k) {
        const double* urow = item.row(k).data();
        double* erow = e.row(k).data();
        for (std::size_t i = 0; i < feats; ++i) {
            const double* wrow = model.encoder_w.row(i).data();
            double acc = model.encoder_b[i];
            for (std::size_t j = 0; j < in_dim; ++j) acc += wrow[j] * urow[j];
            erow[i] = acc;
        }
    }
    return e;
}

RealVector decode_pooled(const ModelParams& model, const RealVector& pooled) {
    const std::size_t classes = model.num_classes();
    RealVector logits(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        const double* wrow = model.decoder_w.row(c).data();
        double acc = model.decoder_b[c];
        for (std::size_t i = 0; i < pooled.size(); ++i) acc += wrow[i] * pooled[i];
        logits[c] = acc;
    }
    return logits;
}

RealVector mean_pool(const RealMatrix& h) {
    RealVector pooled(h.cols, 0.0);
    for (std::size_t k = 0; k < h.rows; ++k) {
        const double* row = h.row(k).data();
        for (std::size_t i = 0; i < h.cols; ++i) pooled[i] += row[i];
    }
    const double inv = 1.0 / static_cast<double>(h.rows);
    for (double& x : pooled) x *= inv;
    return pooled;
}

}  // namespace

RealVector model_forward(const ModelParams& model, const ModelConfig& cfg, const RealMatrix& item,
                         const RealVector* intervals) {
    RealMatrix h = encode(model, item);
    for (const auto& layer : model.layers) h = layer_forward(layer, cfg.layer, h, intervals);
    return decode_pooled(model, mean_pool(h));
}

RealVector model_forward_backward(const ModelParams& model, const ModelConfig& cfg,
                                  const RealMatrix& item, const RealVector* intervals,
                                  const std::function<RealVector(const RealVector&)>& logit_grad,
                                  ModelGrads& grads) {
    const std::size_t len = item.rows;
    const std::size_t feats = model.feature_dim();

    RealMatrix h = encode(model, item);
    std::vector<LayerCache> caches(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l)
        h = layer_forward_cached(model.layers[l], cfg.layer, h, intervals, caches[l]);
    const RealVector pooled = mean_pool(h);
    RealVector logits = decode_pooled(model, pooled);

    const RealVector d_logits = logit_grad(logits);

    // Decoder and pool.
    RealVector d_pooled(feats, 0.0);
    for (std::size_t c = 0; c < model.num_classes(); ++c) {
        grads.d_decoder_b[c] += d_logits[c];
        double* dwrow = grads.d_decoder_w.row(c).data();
        const double* wrow = model.decoder_w.row(c).data();
        for (std::size_t i = 0; i < feats; ++i) {
            dwrow[i] += d_logits[c] * pooled[i];
            d_pooled[i] += d_logits[c] * wrow[i];
        }
    }
    RealMatrix d_h(len, feats);
    const double inv_len = 1.0 / static_cast<double>(len);
    for (std::size_t k = 0; k < len; ++k)
        for (std::size_t i = 0; i < feats; ++i) d_h.at(k, i) = d_pooled[i] * inv_len;

    for (std::size_t l = model.layers.size(); l-- > 0;)
        d_h = layer_backward_cached(model.layers[l], cfg.layer, caches[l], d_h, grads.layers[l]);

    // Encoder.
    for (std::size_t k = 0; k < len; ++k) {
        const double* urow = item.row(k).data();
        const double* drow = d_h.row(k).data();
        for (std::size_t i = 0; i < feats; ++i) {
            grads.d_encoder_b[i] += drow[i];
            double* dwrow = grads.d_encoder_w.row(i).data();
            for (std::size_t j = 0; j < model.input_dim(); ++j) dwrow[j] += drow[i] * urow[j];
        }
    }
    return logits;
}

CrossEntropyResult cross_entropy(const RealVector& logits, std::size_t label) {
    const std::size_t classes = logits.size();
    if (label >= classes) throw std::invalid_argument("cross_entropy: label out of range");
    double peak = logits[0];
    for (double v : logits) peak = std::max(peak, v);
    double z = 0.0;
    for (double v : logits) z += std::exp(v - peak);
    const double log_z = std::log(z) + peak;

    CrossEntropyResult out;
    out.loss = log_z - logits[label];
    out.d_logits.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        out.d_logits[c] = std::exp(logits[c] - log_z);
        if (c == label) out.d_logits[c] -= 1.0;
    }
    return out;
}

void for_each_param(ModelParams& params, ModelGrads* grads, const GroupFlags& flags,
                    const std::function<void(const ParamRef&)>& fn) {
    auto real_buf = [&](const std::string& name, ParamGroup group, RealVector& p, RealVector* g) {
        fn({name, group, p.data(), g ? g->data() : nullptr, p.size(), false});
    };
    auto real_mat = [&](const std::string& name, ParamGroup group, RealMatrix& p, RealMatrix* g) {
        fn({name, group, p.data.data(), g ? g->data.data() : nullptr, p.data.size(), false});
    };
    auto cplx_buf = [&](const std::string& name, ParamGroup group, ComplexVector& p,
                        ComplexVector* g) {
        fn({name, group, reinterpret_cast<double*>(p.data()),
            g ? reinterpret_cast<const double*>(g->data()) : nullptr, 2 * p.size(), true});
    };
    auto cplx_mat = [&](const std::string& name, ParamGroup group, ComplexMatrix& p,
                        ComplexMatrix* g) {
        fn({name, group, reinterpret_cast<double*>(p.data.data()),
            g ? reinterpret_cast<const double*>(g->data.data()) : nullptr, 2 * p.data.size(), true});
    };

    real_mat("encoder.w", ParamGroup::Global, params.encoder_w,
             grads ? &grads->d_encoder_w : nullptr);
    real_buf("encoder.b", ParamGroup::Global, params.encoder_b,
             grads ? &grads->d_encoder_b : nullptr);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const std::string prefix = "layers." + std::to_string(l) + ".";
        S5LayerParams& layer = params.layers[l];
        LayerGrads* lg = grads ? &grads->layers[l] : nullptr;
        const ParamGroup b_group =
            flags.b_tilde_in_global_group ? ParamGroup::Global : ParamGroup::Ssm;
        const ParamGroup c_group = flags.c_tilde_in_ssm_group ? ParamGroup::Ssm : ParamGroup::Global;
        cplx_buf(prefix + "lambda", ParamGroup::Ssm, layer.ssm.lambda, lg ? &lg->d_lambda : nullptr);
        cplx_mat(prefix + "b_tilde", b_group, layer.ssm.b_tilde, lg ? &lg->d_b_tilde : nullptr);
        cplx_mat(prefix + "c_tilde", c_group, layer.ssm.c_tilde, lg ? &lg->d_c_tilde : nullptr);
        real_buf(prefix + "d", ParamGroup::Global, layer.ssm.d, lg ? &lg->d_d : nullptr);
        real_buf(prefix + "log_delta", ParamGroup::Ssm, layer.ssm.log_delta,
                 lg ? &lg->d_log_delta : nullptr);
        real_mat(prefix + "w_gate", ParamGroup::Global, layer.w_gate, lg ? &lg->d_w_gate : nullptr);
        real_buf(prefix + "norm_scale", ParamGroup::Global, layer.norm_scale,
                 lg ? &lg->d_norm_scale : nullptr);
        real_buf(prefix + "norm_bias", ParamGroup::Global, layer.norm_bias,
                 lg ? &lg->d_norm_bias : nullptr);
    }
    real_mat("decoder.w", ParamGroup::Global, params.decoder_w,
             grads ? &grads->d_decoder_w : nullptr);
    real_buf("decoder.b", ParamGroup::Global, params.decoder_b,
             grads ? &grads->d_decoder_b : nullptr);
}

}  // namespace s5
