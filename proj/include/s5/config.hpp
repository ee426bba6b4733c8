#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace s5 {

// Flat key=value run configuration ('#' starts a comment). The schema is
// closed: unknown keys are an error so typos cannot pass silently.
struct RunConfig {
    // model
    std::string dataset = "mnist";  // mnist | irregular
    std::size_t depth = 2;
    std::size_t features = 32;      // H
    std::size_t state_size = 32;    // P
    std::size_t blocks = 1;         // J
    bool conj_sym = true;
    bool bidirectional = false;
    std::string discretization = "zoh";  // zoh | bilinear | direct
    bool prenorm = true;
    double delta_min = 0.001;
    double delta_max = 0.1;
    // optimization
    double lr = 0.004;
    double ssm_lr = 0.001;
    double weight_decay = 0.01;
    std::size_t batch = 32;
    std::size_t epochs = 10;
    std::size_t warmup = 0;
    bool wd_on_b_tilde = false;
    bool c_tilde_in_ssm_group = false;
    // run
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    // data
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    std::size_t train_limit = 0;
    std::size_t test_limit = 0;
    std::size_t irregular_items = 800;
    std::size_t irregular_length = 96;
    std::size_t irregular_classes = 4;
    // outputs
    std::string checkpoint_out = "model.ckpt";
    std::string metrics_out = "metrics.csv";
};

// Parse from file or text. Errors carry the 1-based line number. The
// S5_SEED environment variable, when set, overrides the configured seed.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

}  // namespace s5
