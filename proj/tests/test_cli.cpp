#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "rmt/labelmap.hpp"
#include "test_util.hpp"

using namespace rmt::test;

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    const std::string command = std::string(RMT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe);
    CliResult result;
    char buffer[512];
    while (std::fgets(buffer, sizeof buffer, pipe)) result.output += buffer;
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string make_dataset(const TempDir& dir, int count) {
    const std::string dataset = dir.file("dataset");
    fs::create_directories(dataset);
    for (int i = 0; i < count; ++i) {
        rmt::scene::SemanticLabelMap map = road_scene(24, 12, 2, 16);
        if (i == 0) paint_rect(map, 1, 2, 2, 3, kPedestrian);
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03d.pgm", i);
        rmt::scene::save_map(map, dataset + "/" + name);
    }
    return dataset;
}

} // namespace

TEST_CASE("parse emits the canonical MR JSON") {
    const auto result = run_cli("parse --rule " + quoted(golden_rules()[0]));
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"lhs\":\"x1-x2\",\"op\":\">\",\"rhs\":0") != std::string::npos);

    const auto rule3 = run_cli("parse --rule " + quoted(golden_rules()[2]) + " --emit-mr");
    CHECK(rule3.exit_code == 0);
    CHECK(rule3.output.find("\"rhs\":\"0.3\"") != std::string::npos);
}

TEST_CASE("parse --dump-deps emits JSON lines") {
    const auto result = run_cli("parse --dump-deps --rule " + quoted(golden_rules()[0]));
    CHECK(result.exit_code == 0);
    CHECK(result.output.find(
              R"({"relation":"NSUBJ","dependent":"pedestrian","head":"appears"})") !=
          std::string::npos);
    CHECK(result.output.find(R"({"relation":"ON","dependent":"roadside","head":"appears"})") !=
          std::string::npos);
}

TEST_CASE("parse failures name the failing stage") {
    const auto no_verb = run_cli("parse --rule \"If: blah blah, then: blah blah.\"");
    CHECK(no_verb.exit_code == 1);
    CHECK(no_verb.output.find("NoRootVerb") != std::string::npos);

    const auto malformed = run_cli("parse --rule \"Then: slow down\"");
    CHECK(malformed.exit_code == 1);
    CHECK(malformed.output.find("MalformedRule") != std::string::npos);
}

TEST_CASE("parse accepts a rule file") {
    TempDir dir("rulefile");
    write_text(dir.file("rule.txt"), golden_rules()[0]);
    const auto result = run_cli("parse --rule " + dir.file("rule.txt"));
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"kind\":\"add\"") != std::string::npos);
}

TEST_CASE("ontology show prints the merged table") {
    const auto result = run_cli("ontology show");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("pedestrian") != std::string::npos);
    CHECK(result.output.find("traffic sign") != std::string::npos);

    TempDir dir("cfg");
    write_text(dir.file("config.yaml"), R"(ontology:
  elements:
    - name: animal
      category: Object
      subcategory: DynamicObject/Animal
)");
    const auto merged = run_cli("--config " + dir.file("config.yaml") + " ontology show");
    CHECK(merged.exit_code == 0);
    CHECK(merged.output.find("animal") != std::string::npos);
}

TEST_CASE("generate / validate / sweep workflow") {
    TempDir dir("workflow");
    const std::string dataset = make_dataset(dir, 8);
    const std::string out = dir.file("out");

    const auto gen = run_cli("generate --rule " + quoted(golden_rules()[0]) + " --dataset " +
                             dataset + " --out " + out);
    CHECK(gen.exit_code == 0);
    REQUIRE(fs::exists(out + "/manifest.jsonl"));

    // model: constant predictions -> every pair violates "slow down"
    write_text(dir.file("config.yaml"),
               "model:\n  command: \"awk 'BEGIN{print \\\"image_id,behavior,value\\\"} "
               "{stem=$0; sub(/.*\\\\//, \\\"\\\", stem); sub(/\\\\.pgm$/, \\\"\\\", stem); "
               "print stem \\\",speed,50\\\"; print stem \\\",steering,0\\\"}'\"\n");

    // --rule defaults to the rule.txt written at generation time
    const auto validate = run_cli("--config " + dir.file("config.yaml") + " validate --manifest " +
                                  out + "/manifest.jsonl --out " + out);
    CHECK(validate.exit_code == 3); // violations found
    CHECK(validate.output.find("violations were found out of") != std::string::npos);
    CHECK(fs::exists(out + "/report.json"));
    CHECK(fs::exists(out + "/report.txt"));

    const std::string sweep_template =
        "If: a pedestrian appears on the roadside, Then: the ego-vehicle should slow down at "
        "least {T}%.";
    const auto sweep = run_cli("--config " + dir.file("config.yaml") + " sweep --rule-template " +
                               quoted(sweep_template) + " --thresholds 0,10,20,30,40,50 " +
                               "--manifest " + out + "/manifest.jsonl --out " + out);
    CHECK(sweep.exit_code == 0);
    CHECK(fs::exists(out + "/sweep.csv"));
    CHECK(fs::exists(out + "/sweep.json"));
    CHECK(sweep.output.find("threshold,violations,ratio") != std::string::npos);

    // no violations -> exit 0: a model that halves the speed on followups
    write_text(dir.file("good.yaml"),
               "model:\n  command: \"awk 'BEGIN{print \\\"image_id,behavior,value\\\"} "
               "{stem=$0; sub(/.*\\\\//, \\\"\\\", stem); sub(/\\\\.pgm$/, \\\"\\\", stem); "
               "v=50; if (stem ~ /__f/) v=20; print stem \\\",speed,\\\" v; "
               "print stem \\\",steering,0\\\"}'\"\n");
    const auto clean = run_cli("--config " + dir.file("good.yaml") + " validate --manifest " +
                               out + "/manifest.jsonl --rule " + quoted(golden_rules()[0]) +
                               " --out " + dir.file("out_clean"));
    CHECK(clean.exit_code == 0);
}

TEST_CASE("generate without a supporting engine fails cleanly") {
    TempDir dir("nosupport");
    const std::string dataset = make_dataset(dir, 2);
    const auto result = run_cli("generate --rule " + quoted(golden_rules()[6]) + " --dataset " +
                                dataset + " --out " + dir.file("out"));
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("NoEngineSupports") != std::string::npos);
}

TEST_CASE("RMT_CONFIG supplies the configuration path") {
    TempDir dir("envcfg");
    write_text(dir.file("config.yaml"), "thresholds:\n  delta_steering: 5.0\n");
    const std::string command = "RMT_CONFIG=" + dir.file("config.yaml") + " " +
                                std::string(RMT_CLI_PATH) + " parse --rule " +
                                quoted(golden_rules()[4]) + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe);
    std::string output;
    char buffer[256];
    while (std::fgets(buffer, sizeof buffer, pipe)) output += buffer;
    pclose(pipe);
    CHECK(output.find("\"rhs\":5") != std::string::npos);
}

TEST_CASE("--help lists every subcommand and flag") {
    const auto top = run_cli("--help");
    CHECK(top.exit_code == 0);
    for (const char* sub : {"parse", "generate", "validate", "sweep", "ontology", "--config"}) {
        CHECK(top.output.find(sub) != std::string::npos);
    }
    const auto parse_help = run_cli("parse --help");
    for (const char* flag : {"--rule", "--dump-deps", "--emit-mr"}) {
        CHECK(parse_help.output.find(flag) != std::string::npos);
    }
    const auto sweep_help = run_cli("sweep --help");
    for (const char* flag : {"--rule-template", "--thresholds", "--manifest", "--out"}) {
        CHECK(sweep_help.output.find(flag) != std::string::npos);
    }
}

TEST_CASE("pixel model adapter prints the prediction CSV") {
    TempDir dir("pixmodel");
    rmt::scene::SemanticLabelMap map = road_scene(20, 10, 2, 14);
    paint_rect(map, 1, 2, 5, 10 - 2, kPedestrian); // 40 of 200 pixels = 0.2
    rmt::scene::save_map(map, dir.file("m.pgm"));
    write_text(dir.file("list.txt"), dir.file("m.pgm") + "\n");

    const std::string command =
        std::string(RMT_PIXEL_MODEL_PATH) + " " + dir.file("list.txt") + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe);
    std::string output;
    char buffer[256];
    while (std::fgets(buffer, sizeof buffer, pipe)) output += buffer;
    pclose(pipe);
    // speed = 60 * (1 - min(1, 4*0.2)) = 12
    CHECK(output.find("image_id,behavior,value") != std::string::npos);
    CHECK(output.find("m,speed,12") != std::string::npos);
    CHECK(output.find("m,steering,0") != std::string::npos);
}
