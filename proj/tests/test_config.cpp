#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "s5/config.hpp"

using namespace s5;

TEST_CASE("config parses the documented schema") {
    const RunConfig cfg = parse_config_text(
        "# comment line\n"
        "dataset = irregular\n"
        "depth = 3\n"
        "features = 16   # trailing comment\n"
        "state_size = 8\n"
        "conj_sym = true\n"
        "lr = 0.004\n"
        "ssm_lr = 1e-3\n"
        "seed = 42\n"
        "\n");
    CHECK(cfg.dataset == "irregular");
    CHECK(cfg.depth == 3);
    CHECK(cfg.features == 16);
    CHECK(cfg.state_size == 8);
    CHECK(cfg.conj_sym);
    CHECK(cfg.lr == doctest::Approx(0.004));
    CHECK(cfg.ssm_lr == doctest::Approx(0.001));
    CHECK(cfg.seed == 42);
}

TEST_CASE("unknown keys and malformed lines carry line numbers") {
    CHECK_THROWS_WITH_AS((void)parse_config_text("depth = 2\ntypo_key = 5\n", "cfg"),
                         doctest::Contains("cfg:2"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_config_text("just some text\n", "cfg"),
                         doctest::Contains("cfg:1"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_config_text("depth = banana\n", "cfg"),
                         doctest::Contains("invalid value"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_config_text("dataset = pictures\n", "cfg"),
                         doctest::Contains("dataset"), std::runtime_error);
}

TEST_CASE("S5_SEED overrides the configured seed") {
    setenv("S5_SEED", "777", 1);
    const RunConfig cfg = parse_config_text("seed = 1\n");
    CHECK(cfg.seed == 777);
    unsetenv("S5_SEED");
    const RunConfig cfg2 = parse_config_text("seed = 1\n");
    CHECK(cfg2.seed == 1);
}
