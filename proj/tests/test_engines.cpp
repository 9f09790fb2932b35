#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmt/engines.hpp"

#include <filesystem>
#include <set>

#include "test_util.hpp"

using namespace rmt;
using namespace rmt::engine;
using namespace rmt::test;

namespace fs = std::filesystem;

namespace {

const config::Config& base_config() {
    static const config::Config cfg = config::parse_config("");
    return cfg;
}

infer::TransformationProposition add_pedestrian() {
    infer::TransformationProposition prop;
    prop.kind = infer::TransformKind::add;
    prop.target.element = "pedestrian";
    onto::MatchedEntity ref;
    ref.element = "sidewalk";
    prop.reference = ref;
    prop.position = infer::Position::on;
    return prop;
}

infer::TransformationProposition remove_line() {
    infer::TransformationProposition prop;
    prop.kind = infer::TransformKind::remove;
    prop.target.element = "line";
    return prop;
}

infer::TransformationProposition replace_time() {
    infer::TransformationProposition prop;
    prop.kind = infer::TransformKind::replace;
    prop.target.element = "time";
    onto::MatchedEntity ref;
    ref.element = "time";
    ref.bound_properties["period"] = "night";
    prop.reference = ref;
    prop.replace_kind = infer::ReplaceKind::time;
    return prop;
}

infer::MetamorphicRelation rule1_mr(const config::Config& cfg) {
    return infer::parse_rule(golden_rules()[0], cfg.ontology, cfg.parse_options()).mr;
}

/// Dataset of simple road scenes; maps with index in `with_pedestrian` get a
/// small pedestrian blob usable as a mask template.
std::string make_dataset(const TempDir& dir, int count, const std::set<int>& with_pedestrian,
                         int width = 24, int height = 12, int road_rows = 2) {
    const std::string dataset = dir.file("dataset");
    fs::create_directories(dataset);
    for (int i = 0; i < count; ++i) {
        scene::SemanticLabelMap map = road_scene(width, height, road_rows, width * 2 / 3);
        if (with_pedestrian.count(i)) {
            paint_rect(map, 1, 2, 2, 3, kPedestrian);
        }
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03d.pgm", i);
        scene::save_map(map, dataset + "/" + name);
    }
    return dataset;
}

} // namespace

TEST_CASE("engine configuration is validated") {
    CHECK_THROWS_WITH_AS(config::parse_config(R"(
engines:
  - name: dup
    kind: builtin_label_edit
    support: [{transformation: remove, elements: [line]}]
  - name: dup
    kind: builtin_label_edit
    support: [{transformation: remove, elements: [line]}]
)"),
                         doctest::Contains("duplicate engine name"), Error);
    CHECK_THROWS_WITH_AS(config::parse_config(R"(
engines:
  - name: ext
    kind: external
    support: [{transformation: remove, elements: [line]}]
)"),
                         doctest::Contains("entry"), Error);
    CHECK_THROWS_WITH_AS(config::parse_config(R"(
engines:
  - name: ext
    kind: external
    entry: "true"
    support: []
)"),
                         doctest::Contains("support"), Error);
}

TEST_CASE("select_engine honors support lists and declaration order") {
    const auto& cfg = base_config();

    const auto& add_engine = select_engine(cfg.engines, add_pedestrian());
    CHECK(add_engine.name == "builtin_manipulation");

    const auto& remove_engine = select_engine(cfg.engines, remove_line());
    CHECK(remove_engine.name == "builtin_label_edit");

    CHECK_THROWS_WITH_AS(select_engine(cfg.engines, replace_time()),
                         doctest::Contains("NoEngineSupports"), Error);

    // two engines supporting the same pair: first declared wins
    config::EngineRegistry registry;
    config::EngineSpec a, b;
    a.name = "first";
    a.kind = config::EngineKind::builtin_label_edit;
    a.support.push_back({infer::TransformKind::remove, {"line"}});
    b.name = "second";
    b.kind = config::EngineKind::builtin_label_edit;
    b.support.push_back({infer::TransformKind::remove, {"line"}});
    registry.specs = {a, b};
    CHECK(select_engine(registry, remove_line()).name == "first");
}

TEST_CASE("builtin manipulation adds a gallery mask") {
    TempDir dir("builtin_add");
    const std::string dataset = make_dataset(dir, 3, {0});
    const auto& cfg = base_config();
    const auto mr = rule1_mr(cfg);

    const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out"));
    REQUIRE(campaign.cases.size() == 3);
    for (const auto& c : campaign.cases) {
        REQUIRE(c.generated());
        REQUIRE(c.followups.size() == 1);
        const auto followup = scene::load_map(c.followups[0]);
        const auto source = scene::load_map(c.source);
        // conservation: the followup gained exactly the mask's pedestrian pixels
        const auto gallery = scene::build_gallery_from_maps(
            {dataset + "/scene_000.pgm"}, cfg.ontology.element_names());
        const auto* mask = gallery.first_for("pedestrian");
        REQUIRE(mask);
        CHECK(followup.count("pedestrian") ==
              source.count("pedestrian") + mask->solid_pixels());
    }
}

TEST_CASE("external engines run through the command protocol") {
    TempDir dir("external");
    const std::string dataset = make_dataset(dir, 2, {});

    config::Config cfg = base_config();
    config::EngineSpec stub;
    stub.name = "identity";
    stub.kind = config::EngineKind::external;
    stub.support.push_back({infer::TransformKind::remove, {"line"}});
    stub.timeout_s = 30;

    infer::MetamorphicRelation mr;
    mr.rule_text = "stub";
    infer::MrBlock block;
    block.proposition = remove_line();
    block.formula.behavior = infer::Behavior::speed;
    block.formula.conjuncts.push_back({infer::Lhs::diff_ab, infer::CmpOp::gt, Rational(0)});
    mr.blocks.push_back(block);

    SUBCASE("identity engine copies input to output") {
        stub.entry = "cp {input} {output} && cp {input}.json {output}.json";
        cfg.engines.specs = {stub};
        const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out1"));
        CHECK(campaign.n_generated == 2);
        for (const auto& c : campaign.cases) {
            CHECK(c.generated());
            CHECK(fs::exists(c.followups.at(0)));
        }
    }
    SUBCASE("exit 2 marks the case filtered") {
        stub.entry = "exit 2";
        cfg.engines.specs = {stub};
        const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out2"));
        CHECK(campaign.n_generated == 0);
        CHECK(campaign.n_filtered == 2);
        for (const auto& c : campaign.cases) CHECK(c.status == "filtered(engine_declined)");
    }
    SUBCASE("other exit codes raise EngineFailure with stderr") {
        stub.entry = "echo boom >&2; exit 3";
        cfg.engines.specs = {stub};
        CHECK_THROWS_WITH_AS(generate_campaign(cfg, mr, dataset, dir.file("out3")),
                             doctest::Contains("boom"), Error);
    }
    SUBCASE("success without an output file is an EngineFailure") {
        stub.entry = "true";
        cfg.engines.specs = {stub};
        CHECK_THROWS_WITH_AS(generate_campaign(cfg, mr, dataset, dir.file("out4")),
                             doctest::Contains("EngineFailure"), Error);
    }
    SUBCASE("timeouts are enforced") {
        stub.entry = "sleep 5";
        stub.timeout_s = 1;
        cfg.engines.specs = {stub};
        CHECK_THROWS_WITH_AS(generate_campaign(cfg, mr, dataset, dir.file("out5")),
                             doctest::Contains("Timeout"), Error);
    }
    SUBCASE("the proposition file carries the canonical JSON") {
        stub.entry = "cp {proposition} {output}";
        cfg.engines.specs = {stub};
        const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out6"));
        REQUIRE(campaign.n_generated == 2);
        const std::string prop_text = read_text(campaign.cases[0].followups[0]);
        const auto parsed = nlohmann::ordered_json::parse(prop_text);
        CHECK(parsed.at("kind") == "remove");
        CHECK(parsed.at("target").at("element") == "line");
    }
}

TEST_CASE("translation outputs too close to the source get filtered") {
    TempDir dir("translation");
    const std::string dataset = make_dataset(dir, 2, {});

    config::Config cfg = base_config();
    config::EngineSpec translator;
    translator.name = "fake_translator";
    translator.kind = config::EngineKind::external;
    translator.support.push_back({infer::TransformKind::replace, {"time"}});
    translator.timeout_s = 30;

    infer::MetamorphicRelation mr;
    mr.rule_text = "stub";
    infer::MrBlock block;
    block.proposition = replace_time();
    block.formula.conjuncts.push_back({infer::Lhs::diff_ab, infer::CmpOp::gt, Rational(0)});
    mr.blocks.push_back(block);

    SUBCASE("an identity translation is already in the target domain") {
        translator.entry = "cp {input} {output} && cp {input}.json {output}.json";
        cfg.engines.specs = {translator};
        const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out"));
        CHECK(campaign.n_generated == 0);
        for (const auto& c : campaign.cases)
            CHECK(c.status == "filtered(already_in_domain)");
    }
    SUBCASE("a changed scene passes the domain filter") {
        // remap every road pixel (id 0) to sky (id 2); class-id deltas are
        // small, so lower the MSE floor to separate the two outcomes
        translator.entry =
            "python3 -c \"import sys; d=open('{input}','rb').read(); "
            "h=d.index(b'255')+4; body=bytes(2 if b==0 else b for b in d[h:]); "
            "open('{output}','wb').write(d[:h]+body)\" "
            "&& cp {input}.json {output}.json";
        cfg.engines.specs = {translator};
        cfg.thresholds.mse_min = 0.1;
        const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out2"));
        CHECK(campaign.n_generated == 2);
    }
}

TEST_CASE("generate_campaign bookkeeping") {
    const auto& cfg = base_config();

    SUBCASE("filtered cases keep their reason in the manifest") {
        TempDir dir("bookkeeping");
        // 10 maps; 3 of them all-road (no transition -> no_position)
        const std::string dataset = dir.file("dataset");
        fs::create_directories(dataset);
        for (int i = 0; i < 10; ++i) {
            scene::SemanticLabelMap map = i < 3 ? blank_map(24, 12) : road_scene(24, 12, 2, 16);
            if (i < 3) paint_rect(map, 0, 0, 24, 2, kRoad); // road-only ground rows
            if (i == 5) paint_rect(map, 1, 2, 2, 3, kPedestrian);
            char name[32];
            std::snprintf(name, sizeof name, "scene_%03d.pgm", i);
            scene::save_map(map, dataset + "/" + name);
        }
        const auto campaign = generate_campaign(cfg, rule1_mr(cfg), dataset, dir.file("out"));
        CHECK(campaign.cases.size() == 10);
        CHECK(campaign.n_generated == 7);
        CHECK(campaign.n_filtered == 3);

        const auto reread = read_manifest(campaign.manifest_path);
        REQUIRE(reread.size() == 10);
        int filtered = 0;
        for (const auto& c : reread) {
            if (!c.generated()) {
                ++filtered;
                CHECK(c.status == "filtered(no_position)");
                CHECK(c.followups.empty());
            }
        }
        CHECK(filtered == 3);
    }

    SUBCASE("chained MRs produce two followups per case") {
        TempDir dir("chained");
        const std::string dataset = make_dataset(dir, 4, {0}, 32, 20, /*road_rows=*/8);
        const auto mr =
            infer::parse_rule(golden_rules()[3], cfg.ontology, cfg.parse_options()).mr;
        REQUIRE(mr.chained());
        const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out"));
        for (const auto& c : campaign.cases) {
            if (c.generated()) CHECK(c.followups.size() == 2);
        }
        CHECK(campaign.n_generated > 0);
    }

    SUBCASE("empty dataset raises EmptyDataset") {
        TempDir dir("empty");
        fs::create_directories(dir.file("dataset"));
        CHECK_THROWS_WITH_AS(
            generate_campaign(cfg, rule1_mr(cfg), dir.file("dataset"), dir.file("out")),
            doctest::Contains("EmptyDataset"), Error);
    }
}

TEST_CASE("re-running a campaign yields a byte-identical manifest") {
    TempDir dir("determinism");
    const std::string dataset = make_dataset(dir, 5, {0, 2});
    const auto& cfg = base_config();
    const auto mr = rule1_mr(cfg);

    const auto first = generate_campaign(cfg, mr, dataset, dir.file("out_a"));
    const auto second = generate_campaign(cfg, mr, dataset, dir.file("out_b"));
    std::string a = read_text(first.manifest_path);
    std::string b = read_text(second.manifest_path);
    // normalize the differing output directories
    const auto scrub = [](std::string s, const std::string& needle) {
        std::size_t pos;
        while ((pos = s.find(needle)) != std::string::npos) s.replace(pos, needle.size(), "OUT");
        return s;
    };
    CHECK(scrub(a, "out_a") == scrub(b, "out_b"));
}

TEST_CASE("parallel workers never share a work directory") {
    TempDir dir("parallel");
    const std::string dataset = make_dataset(dir, 12, {});

    config::Config cfg = base_config();
    cfg.workers = 4;
    config::EngineSpec stub;
    stub.name = "recorder";
    stub.kind = config::EngineKind::external;
    // every run records its work dir (the proposition file's directory)
    stub.entry = "dirname {proposition} >> " + dir.file("dirs.txt") +
                 " && cp {input} {output} && cp {input}.json {output}.json";
    stub.support.push_back({infer::TransformKind::remove, {"line"}});
    cfg.engines.specs = {stub};

    infer::MetamorphicRelation mr;
    mr.rule_text = "stub";
    infer::MrBlock block;
    block.proposition = remove_line();
    block.formula.conjuncts.push_back({infer::Lhs::diff_ab, infer::CmpOp::gt, Rational(0)});
    mr.blocks.push_back(block);

    const auto campaign = generate_campaign(cfg, mr, dataset, dir.file("out"));
    CHECK(campaign.n_generated == 12);

    std::istringstream dirs(read_text(dir.file("dirs.txt")));
    std::set<std::string> unique;
    std::string line;
    int lines = 0;
    while (std::getline(dirs, line)) {
        if (line.empty()) continue;
        unique.insert(line);
        ++lines;
    }
    CHECK(lines == 12);
    CHECK(unique.size() == 12);
}
