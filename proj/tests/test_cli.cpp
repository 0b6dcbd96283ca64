#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fbembed/pipeline.hpp"

using namespace fbembed;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("fbembed_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

const char* kSmallRun = R"({
    "steps": 2,
    "render": {"resolution": 32, "window": [-2.0, 2.0, -2.0, 2.0]},
    "probe": {"points": [[0.5, 0.5, 0.0, 0.0], [-4.0, 0.001, 0.0, 0.0]], "budget": 16}
})";

}  // namespace

TEST_CASE("config parsing") {
    SECTION("minimal config keeps the documented defaults") {
        RunConfig cfg = parse_config_text("{}");
        CHECK(cfg.params.rho == 0.25);
        CHECK(cfg.params.delta == 0.05);
        CHECK(cfg.params.s == 0.45);
        CHECK(cfg.params.r == 0.55);
        CHECK(cfg.domain.has_half_line);
    }
    SECTION("the contraction pair must satisfy r^2 < s") {
        CHECK_THROWS_WITH(
            parse_config_text(R"({"params": {"s": 0.3, "r": 0.6}})"),
            Catch::Matchers::ContainsSubstring("r^2 < s"));
    }
    SECTION("unknown keys are named, not ignored") {
        CHECK_THROWS_WITH(parse_config_text(R"({"stepz": 3})"),
                          Catch::Matchers::ContainsSubstring("stepz"));
        CHECK_THROWS_WITH(parse_config_text(R"({"render": {"resolutio": 64}})"),
                          Catch::Matchers::ContainsSubstring("resolutio"));
    }
    SECTION("syntax errors are config errors") {
        CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
    }
    SECTION("punctures round-trip into the domain") {
        RunConfig cfg = parse_config_text(R"({"domain": {"punctures": [[1.0, 0.0]]}})");
        REQUIRE(cfg.domain.punctures.truncation == 1);
        CHECK(cfg.domain.punctures.points()[0] == Complex(1.0, 0.0));
        CHECK(cfg.truncation == 1);  // pole truncation follows the punctures
    }
}

TEST_CASE("subcommand runs", "[slow]") {
    SECTION("probe with budget 0 is a valid run of weak verdicts") {
        RunConfig cfg = parse_config_text(
            R"({"steps": 1, "probe": {"points": [[3.0, 0.0, 0.0, 0.0]], "budget": 0}})");
        const auto dir = fresh_dir("probe0");
        RunReport rep = run_subcommand("probe", cfg, dir.string());
        CHECK(rep.exit_code == 0);
        const std::string csv = slurp(dir / "probe.csv");
        CHECK(csv.find("undetermined") != std::string::npos);
        CHECK(csv.find("inside") == std::string::npos);
    }
    SECTION("check-lemma2 emits three verdict-true rows") {
        const auto dir = fresh_dir("lemma2");
        RunReport rep = run_subcommand("check-lemma2", RunConfig{}, dir.string());
        REQUIRE(rep.exit_code == 0);
        const std::string csv = slurp(dir / "lemma2.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
        CHECK(csv.find(",0,") == std::string::npos);           // no false verdict
    }
    SECTION("an unknown subcommand is a config error") {
        RunReport rep =
            run_subcommand("renderr", RunConfig{}, fresh_dir("bad").string());
        CHECK(rep.exit_code == 2);
    }
    SECTION("classify without its config section is a config error") {
        RunReport rep =
            run_subcommand("classify", RunConfig{}, fresh_dir("clsmiss").string());
        CHECK(rep.exit_code == 2);
    }
    SECTION("classify runs a configured domain spec") {
        RunConfig cfg = parse_config_text(R"({
            "classify": {
                "punctures": [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
                "limit": "inf"
            }
        })");
        const auto dir = fresh_dir("classify");
        RunReport rep = run_subcommand("classify", cfg, dir.string());
        REQUIRE(rep.exit_code == 0);
        CHECK(slurp(dir / "standard_domain.txt").find("punctures 3") !=
              std::string::npos);
    }
    SECTION("starved pusher budgets exit with the unpushable code") {
        RunConfig cfg = parse_config_text(
            R"({"steps": 2, "budgets": {"degree": 1, "retry": 0}})");
        const auto dir = fresh_dir("starved");
        RunReport rep = run_subcommand("iterate", cfg, dir.string());
        CHECK(rep.exit_code == 4);
        // partial manifest still written, failure artifact names the stage
        const std::string manifest = slurp(dir / "manifest.json");
        CHECK(manifest.find("failure.txt") != std::string::npos);
        CHECK(slurp(dir / "failure.txt").find("iterate") != std::string::npos);
    }
}

TEST_CASE("replayability: identical configs give identical bytes", "[slow]") {
    RunConfig cfg = parse_config_text(kSmallRun);
    const auto dir_a = fresh_dir("replay_a");
    const auto dir_b = fresh_dir("replay_b");
    REQUIRE(run_subcommand("render", cfg, dir_a.string(), 1).exit_code == 0);
    REQUIRE(run_subcommand("render", cfg, dir_b.string(), 2).exit_code == 0);
    for (const char* name : {"slice.ppm", "counts.csv", "steps.csv"})
        if (std::filesystem::exists(dir_a / name))
            CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    CHECK(slurp(dir_a / "slice.ppm") == slurp(dir_b / "slice.ppm"));
}

TEST_CASE("full pipeline on the flat domain stays off the boundary", "[slow]") {
    RunConfig cfg = parse_config_text(R"({
        "steps": 2,
        "render": {"resolution": 32, "window": [-2.0, 2.0, -2.0, 2.0]}
    })");
    const auto dir = fresh_dir("full");
    RunReport rep = run_subcommand("full-pipeline", cfg, dir.string());
    REQUIRE(rep.exit_code == 0);
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("slice.ppm") != std::string::npos);
    CHECK(manifest.find("steps.csv") != std::string::npos);
    // stats bucket "on_boundary" reports zero Inside pixels
    const std::string stats = slurp(dir / "slice_stats.csv");
    const auto pos = stats.find("on_boundary,");
    REQUIRE(pos != std::string::npos);
    const auto line = stats.substr(pos, stats.find('\n', pos) - pos);
    CHECK(line.substr(line.rfind(',') + 1) == "0");
}
