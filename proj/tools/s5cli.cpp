#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "s5/runner.hpp"
#include "s5/verify.hpp"

namespace {

using namespace s5;

int report(const std::vector<CheckResult>& checks) {
    int failures = 0;
    for (const CheckResult& c : checks) {
        std::printf("%-44s %12.4e  %s %.4e  [%s]  (%.2fs)\n", c.name.c_str(), c.value,
                    c.pass_at_or_above ? ">=" : "<=", c.threshold, c.pass ? "PASS" : "FAIL",
                    c.seconds);
        if (!c.pass) ++failures;
    }
    return failures;
}

std::vector<std::size_t> parse_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok = csv.substr(pos, comma == std::string::npos ? csv.npos : comma - pos);
        out.push_back(std::stoull(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

int cmd_verify(const std::vector<std::string>& suites, std::size_t workers, std::uint64_t seed) {
    int failures = 0;
    auto want = [&](const std::string& name) {
        if (suites.empty()) return true;
        for (const std::string& s : suites)
            if (s == name || s == "all") return true;
        return false;
    };
    if (want("scan")) failures += report(verify_scan(workers, 50, seed + 1));
    if (want("operator")) failures += report(verify_operator(10000, seed + 2));
    if (want("hippo")) failures += report(verify_hippo());
    if (want("prop2")) failures += report(verify_prop2(20, seed + 3));
    if (want("corollary1")) {
        std::vector<ConvergenceReport> reports;
        failures += report(verify_corollary1(3, seed + 4, &reports));
        std::printf("seed,N,e\n");
        for (const ConvergenceReport& r : reports)
            for (std::size_t i = 0; i < r.n_values.size(); ++i)
                std::printf("%llu,%zu,%.6e\n", static_cast<unsigned long long>(r.input_seed),
                            r.n_values[i], r.discrepancies[i]);
    }
    if (want("conv")) failures += report(verify_conv(20, seed + 5));
    if (want("grad")) failures += report(verify_grad(seed + 6));
    if (failures > 0) {
        std::printf("%d check(s) failed\n", failures);
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"S5 state space sequence model kernels"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for the bench flag
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "run numerical verification suites");
    std::vector<std::string> suites;
    std::size_t verify_workers = 4;
    std::uint64_t verify_seed = 0;
    verify->add_option("--suite", suites,
                       "suites: scan operator hippo prop2 corollary1 conv grad all");
    verify->add_option("--workers", verify_workers, "parallel scan worker count");
    verify->add_option("--seed", verify_seed, "base seed");

    auto* bench = app.add_subcommand("bench", "scan/convolution timing table");
    bench->set_help_flag("--help", "print help");
    std::string lengths_csv = "4096,8192,16384";
    std::string workers_csv = "1,2,4";
    std::size_t bench_p = 64, bench_h = 64, repeats = 5;
    std::uint64_t bench_seed = 7;
    std::string bench_out;
    bench->add_option("--lengths", lengths_csv, "comma-separated sequence lengths");
    bench->add_option("--p", bench_p, "state dimension");
    bench->add_option("--h", bench_h, "feature dimension");
    bench->add_option("--workers", workers_csv, "comma-separated worker counts");
    bench->add_option("--repeats", repeats, "timing repeats (median reported)");
    bench->add_option("--seed", bench_seed, "input seed");
    bench->add_option("--csv", bench_out, "also write the table to this file");

    auto* train = app.add_subcommand("train", "train a classifier per config");
    std::string train_config;
    train->add_option("--config", train_config, "key=value config file")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint per config");
    std::string eval_config, eval_ckpt;
    eval->add_option("--config", eval_config, "key=value config file")->required();
    eval->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify(suites, verify_workers, verify_seed);

        if (bench->parsed()) {
            const std::vector<BenchRow> rows = run_bench(
                parse_list(lengths_csv), bench_p, bench_h, parse_list(workers_csv), repeats,
                bench_seed);
            const std::string csv = bench_csv(rows);
            std::fputs(csv.c_str(), stdout);
            if (!bench_out.empty()) write_file(bench_out, csv);
            return 0;
        }

        if (train->parsed()) {
            const RunConfig cfg = parse_config_file(train_config);
            const RunResult result = run_training(cfg);
            write_file(cfg.metrics_out, result.metrics_csv);
            save_checkpoint(result.checkpoint, cfg.checkpoint_out);
            std::printf("train_loss,%.6f\ntrain_accuracy,%.4f\n", result.final_train_loss,
                        result.final_train_accuracy);
            std::printf("test_loss,%.6f\ntest_accuracy,%.4f\n", result.test_loss,
                        result.test_accuracy);
            std::printf("checkpoint,%s\nmetrics,%s\n", cfg.checkpoint_out.c_str(),
                        cfg.metrics_out.c_str());
            return 0;
        }

        if (eval->parsed()) {
            const RunConfig cfg = parse_config_file(eval_config);
            RunSetup setup = build_run(cfg);
            model_from_checkpoint(setup.model, load_checkpoint(eval_ckpt));
            const SequenceBatch& data =
                setup.test_data.size() > 0 ? setup.test_data : setup.train_data;
            const EvalMetrics ev = evaluate(setup.model, setup.model_cfg, data, cfg.workers);
            std::printf("eval_loss,%.6f\neval_accuracy,%.4f\n", ev.mean_loss, ev.accuracy);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
