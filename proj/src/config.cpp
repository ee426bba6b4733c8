#include "s5/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace s5 {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "yes") { out = true; return true; }
    if (v == "false" || v == "0" || v == "no") { out = false; return true; }
    return false;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;

    std::map<std::string, std::function<bool(const std::string&)>> setters;
    auto set_size = [](std::size_t& field) {
        return [&field](const std::string& v) {
            try { field = std::stoull(v); } catch (...) { return false; }
            return true;
        };
    };
    auto set_u64 = [](std::uint64_t& field) {
        return [&field](const std::string& v) {
            try { field = std::stoull(v); } catch (...) { return false; }
            return true;
        };
    };
    auto set_double = [](double& field) {
        return [&field](const std::string& v) {
            try { std::size_t used = 0; field = std::stod(v, &used); return used == v.size(); }
            catch (...) { return false; }
        };
    };
    auto set_bool = [](bool& field) {
        return [&field](const std::string& v) { return parse_bool(v, field); };
    };
    auto set_string = [](std::string& field) {
        return [&field](const std::string& v) { field = v; return true; };
    };

    setters["dataset"] = set_string(cfg.dataset);
    setters["depth"] = set_size(cfg.depth);
    setters["features"] = set_size(cfg.features);
    setters["state_size"] = set_size(cfg.state_size);
    setters["blocks"] = set_size(cfg.blocks);
    setters["conj_sym"] = set_bool(cfg.conj_sym);
    setters["bidirectional"] = set_bool(cfg.bidirectional);
    setters["discretization"] = set_string(cfg.discretization);
    setters["prenorm"] = set_bool(cfg.prenorm);
    setters["delta_min"] = set_double(cfg.delta_min);
    setters["delta_max"] = set_double(cfg.delta_max);
    setters["lr"] = set_double(cfg.lr);
    setters["ssm_lr"] = set_double(cfg.ssm_lr);
    setters["weight_decay"] = set_double(cfg.weight_decay);
    setters["batch"] = set_size(cfg.batch);
    setters["epochs"] = set_size(cfg.epochs);
    setters["warmup"] = set_size(cfg.warmup);
    setters["wd_on_b_tilde"] = set_bool(cfg.wd_on_b_tilde);
    setters["c_tilde_in_ssm_group"] = set_bool(cfg.c_tilde_in_ssm_group);
    setters["seed"] = set_u64(cfg.seed);
    setters["workers"] = set_size(cfg.workers);
    setters["train_images"] = set_string(cfg.train_images);
    setters["train_labels"] = set_string(cfg.train_labels);
    setters["test_images"] = set_string(cfg.test_images);
    setters["test_labels"] = set_string(cfg.test_labels);
    setters["train_limit"] = set_size(cfg.train_limit);
    setters["test_limit"] = set_size(cfg.test_limit);
    setters["irregular_items"] = set_size(cfg.irregular_items);
    setters["irregular_length"] = set_size(cfg.irregular_length);
    setters["irregular_classes"] = set_size(cfg.irregular_classes);
    setters["checkpoint_out"] = set_string(cfg.checkpoint_out);
    setters["metrics_out"] = set_string(cfg.metrics_out);

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) fail(origin, line_no, "unknown key '" + key + "'");
        if (!it->second(value)) fail(origin, line_no, "invalid value '" + value + "' for key '" + key + "'");
    }

    if (cfg.dataset != "mnist" && cfg.dataset != "irregular")
        throw std::runtime_error(origin + ": dataset must be 'mnist' or 'irregular'");
    if (cfg.discretization != "zoh" && cfg.discretization != "bilinear" &&
        cfg.discretization != "direct")
        throw std::runtime_error(origin + ": discretization must be zoh, bilinear or direct");

    if (const char* env_seed = std::getenv("S5_SEED")) {
        try {
            cfg.seed = std::stoull(env_seed);
        } catch (...) {
            throw std::runtime_error("S5_SEED is not an integer: " + std::string(env_seed));
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace s5
