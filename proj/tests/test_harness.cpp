#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmt/harness.hpp"

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace rmt;
using namespace rmt::harness;
using namespace rmt::test;

namespace {

const config::Config& base_config() {
    static const config::Config cfg = config::parse_config("");
    return cfg;
}

infer::MetamorphicRelation parse(const std::string& rule) {
    const auto& cfg = base_config();
    return infer::parse_rule(rule, cfg.ontology, cfg.parse_options()).mr;
}

engine::GeneratedCase make_case(const std::string& id, bool generated, int followups = 1) {
    engine::GeneratedCase c;
    c.case_id = id;
    c.source = "/data/" + id + ".pgm";
    if (generated) {
        for (int i = 1; i <= followups; ++i)
            c.followups.push_back("/out/" + id + "__f" + std::to_string(i) + ".pgm");
        c.status = "generated";
    } else {
        c.status = "filtered(no_position)";
    }
    c.proposition = nlohmann::ordered_json::object();
    return c;
}

// Independent re-implementation of the expected-change table semantics,
// straight from ChangePropositions; shares no code with build_formula /
// evaluate_formula.
bool oracle_pair_passes(const infer::ChangePropositions& p, double x1, double x2) {
    const double n = !p.quantity ? 0.0
                     : p.quantity->unit == infer::Unit::percent
                         ? p.quantity->value.to_double() / 100.0
                         : p.quantity->value.to_double();
    const bool percent = p.quantity && p.quantity->unit == infer::Unit::percent;
    if (percent && x1 == 0.0) return false; // degenerate ratio counts as violation

    switch (p.change) {
        case infer::ChangeKind::same:
            return std::fabs(x1 - x2) <= 1.39;
        case infer::ChangeKind::decrease:
            if (!p.quantity) return p.negated ? x1 <= x2 : x1 > x2;
            if (p.modifier == infer::Modifier::less_than) {
                if (percent)
                    return p.negated ? (x1 - x2) / x1 >= n
                                     : (x1 - x2) / x1 <= n && x1 > x2;
                return p.negated ? x1 - x2 >= n : (x1 - x2 <= n && x1 > x2);
            }
            if (percent) return p.negated ? (x1 - x2) / x1 <= n : (x1 - x2) / x1 >= n;
            return p.negated ? x1 - x2 <= n : x1 - x2 >= n;
        case infer::ChangeKind::increase:
            if (!p.quantity) return p.negated ? x1 >= x2 : x1 < x2;
            if (p.modifier == infer::Modifier::less_than) {
                if (percent)
                    return p.negated ? (x2 - x1) / x1 >= n
                                     : (x2 - x1) / x1 <= n && x2 > x1;
                return p.negated ? x2 - x1 >= n : (x2 - x1 <= n && x2 > x1);
            }
            if (percent) return p.negated ? (x2 - x1) / x1 <= n : (x2 - x1) / x1 >= n;
            return p.negated ? x2 - x1 <= n : x2 - x1 >= n;
    }
    return false;
}

} // namespace

TEST_CASE("predictions CSV parsing") {
    const auto table = parse_predictions_csv(
        "image_id,behavior,value\n"
        "a,speed,50.5\n"
        "a,steering,-3\n"
        "b,speed,44\n");
    CHECK(table.size() == 3);
    CHECK(table.at({"a", infer::Behavior::speed}) == doctest::Approx(50.5));
    CHECK(table.at({"a", infer::Behavior::steering}) == doctest::Approx(-3));

    CHECK_THROWS_WITH_AS(parse_predictions_csv("id,b,v\n"), doctest::Contains("image_id"), Error);
    CHECK_THROWS_WITH_AS(parse_predictions_csv("image_id,behavior,value\na,speed,oops\n"),
                         doctest::Contains("FormatError"), Error);
    CHECK_THROWS_WITH_AS(parse_predictions_csv("image_id,behavior,value\na,yaw,1\n"),
                         doctest::Contains("behavior"), Error);
}

TEST_CASE("collect_predictions pairs sources with followups") {
    TempDir dir("collect");

    SUBCASE("seven generated single-block cases need fourteen records") {
        std::vector<engine::GeneratedCase> cases;
        std::string csv = "image_id,behavior,value\n";
        for (int i = 0; i < 7; ++i) {
            const std::string id = "case" + std::to_string(i);
            cases.push_back(make_case(id, true));
            csv += id + ",speed,50\n";
            csv += id + "__f1,speed,45\n";
        }
        cases.push_back(make_case("skipped", false)); // filtered: no records needed
        write_text(dir.file("preds.csv"), csv);
        config::ModelSpec model;
        model.predictions_csv = dir.file("preds.csv");
        const auto table = collect_predictions(cases, model, dir.file("scratch"));
        CHECK(table.size() == 14);
    }

    SUBCASE("a missing followup is an error") {
        std::vector<engine::GeneratedCase> cases = {make_case("a", true)};
        write_text(dir.file("short.csv"), "image_id,behavior,value\na,speed,50\n");
        config::ModelSpec model;
        model.predictions_csv = dir.file("short.csv");
        CHECK_THROWS_WITH_AS(collect_predictions(cases, model, dir.file("scratch")),
                             doctest::Contains("MissingPrediction"), Error);
    }

    SUBCASE("chained cases carry three records") {
        std::vector<engine::GeneratedCase> cases = {make_case("a", true, 2)};
        write_text(dir.file("tri.csv"),
                   "image_id,behavior,value\na,speed,50\na__f1,speed,45\na__f2,speed,40\n");
        config::ModelSpec model;
        model.predictions_csv = dir.file("tri.csv");
        const auto table = collect_predictions(cases, model, dir.file("scratch"));
        CHECK(table.size() == 3);
    }

    SUBCASE("model command output is consumed") {
        std::vector<engine::GeneratedCase> cases = {make_case("a", true)};
        config::ModelSpec model;
        model.command = "printf 'image_id,behavior,value\\na,speed,50\\na__f1,speed,45\\n' ; true";
        const auto table = collect_predictions(cases, model, dir.file("scratch"));
        CHECK(table.size() == 2);
    }

    SUBCASE("failing model commands raise ModelCommandFailed") {
        std::vector<engine::GeneratedCase> cases = {make_case("a", true)};
        config::ModelSpec model;
        model.command = "exit 9";
        CHECK_THROWS_WITH_AS(collect_predictions(cases, model, dir.file("scratch")),
                             doctest::Contains("ModelCommandFailed"), Error);
    }
}

TEST_CASE("evaluate_case on the golden MRs") {
    SUBCASE("Rule 1: plain decrease") {
        const auto mr = parse(golden_rules()[0]);
        CHECK(!evaluate_case(mr, "c", 50, 44, {}).violation);
        CHECK(evaluate_case(mr, "c", 44, 50, {}).violation);
        CHECK(evaluate_case(mr, "c", 50, 50, {}).violation);
    }
    SUBCASE("Rule 3: at least 30 percent") {
        const auto mr = parse(golden_rules()[2]);
        const auto fail = evaluate_case(mr, "c", 50, 40, {});
        CHECK(fail.violation); // 20% < 30%
        REQUIRE(fail.failed_conjunct);
        CHECK(*fail.failed_conjunct == "(x1-x2)/x1>=0.3");
        CHECK(!evaluate_case(mr, "c", 50, 30, {}).violation); // 40% >= 30%
        const auto degenerate = evaluate_case(mr, "c", 0, 5, {});
        CHECK(degenerate.violation);
        CHECK(degenerate.degenerate);
    }
    SUBCASE("Rule 5: steering delta") {
        const auto mr = parse(golden_rules()[4]);
        CHECK(evaluate_case(mr, "c", 3.0, 5.0, {}).violation); // |diff| = 2 > 1.39
        CHECK(!evaluate_case(mr, "c", 3.0, 4.0, {}).violation);
    }
    SUBCASE("chained MRs need a triple and both blocks") {
        const auto mr = parse(golden_rules()[3]);
        CHECK_THROWS_WITH_AS(evaluate_case(mr, "c", 50, 45, {}),
                             doctest::Contains("ArityMismatch"), Error);
        CHECK(!evaluate_case(mr, "c", 50, 45, 40.0).violation);
        CHECK(evaluate_case(mr, "c", 50, 45, 45.0).violation); // block 2 fails
        CHECK(evaluate_case(mr, "c", 50, 55, 50.0).violation); // block 1 fails
    }
}

TEST_CASE("evaluate_campaign aggregates verdicts") {
    const auto mr = parse(golden_rules()[0]);
    std::vector<engine::GeneratedCase> cases = {
        make_case("a", true), make_case("b", true), make_case("c", false),
        make_case("d", true)};
    PredictionTable predictions;
    predictions[{"a", infer::Behavior::speed}] = 50;
    predictions[{"a__f1", infer::Behavior::speed}] = 45; // pass
    predictions[{"b", infer::Behavior::speed}] = 50;
    predictions[{"b__f1", infer::Behavior::speed}] = 55; // violation
    predictions[{"d", infer::Behavior::speed}] = 50;
    predictions[{"d__f1", infer::Behavior::speed}] = 50; // violation

    const auto report = evaluate_campaign(mr, cases, predictions);
    CHECK(report.n_cases == 4);
    CHECK(report.n_filtered == 1);
    CHECK(report.n_evaluated == 3);
    CHECK(report.n_violations == 2);
    REQUIRE(report.ratio);
    CHECK(*report.ratio == doctest::Approx(2.0 / 3.0));
    // verdicts sorted by case id
    REQUIRE(report.verdicts.size() == 3);
    CHECK(report.verdicts[0].case_id == "a");
    CHECK(report.verdicts[1].case_id == "b");
    CHECK(report.verdicts[2].case_id == "d");
    // arithmetic invariants
    CHECK(report.n_evaluated == report.n_cases - report.n_filtered);
    CHECK(report.n_violations <= report.n_evaluated);
    CHECK(std::fabs(*report.ratio - static_cast<double>(report.n_violations) /
                                        static_cast<double>(report.n_evaluated)) < 1e-12);
}

TEST_CASE("fully filtered campaigns report no ratio") {
    const auto mr = parse(golden_rules()[0]);
    std::vector<engine::GeneratedCase> cases = {make_case("a", false), make_case("b", false)};
    const auto report = evaluate_campaign(mr, cases, {});
    CHECK(report.n_cases == 2);
    CHECK(report.n_filtered == 2);
    CHECK(report.n_evaluated == 0);
    CHECK(report.n_violations == 0);
    CHECK(!report.ratio);
    CHECK(report_text(report).find("violation ratio: n/a") != std::string::npos);
}

TEST_CASE("report text and JSON") {
    ViolationReport report;
    report.rule_text = "some rule";
    report.n_cases = 600;
    report.n_filtered = 68;
    report.n_evaluated = 532;
    report.n_violations = 294;
    report.ratio = 294.0 / 532.0;

    const std::string text = report_text(report);
    CHECK(text.rfind("294 violations were found out of 532 test cases\n", 0) == 0);

    const auto j = report_json(report);
    CHECK(j.at("counts").at("evaluated") == 532);
    CHECK(j.at("counts").at("violations") == 294);
    const std::string dumped = j.dump();
    CHECK(dumped.find("\"rule\"") < dumped.find("\"counts\""));
    CHECK(dumped.find("\"counts\"") < dumped.find("\"ratio\""));
    CHECK(dumped.find("\"ratio\"") < dumped.find("\"verdicts\""));

    SUBCASE("empty evaluation renders n/a") {
        ViolationReport empty;
        empty.rule_text = "r";
        empty.n_cases = 3;
        empty.n_filtered = 3;
        const std::string t = report_text(empty);
        CHECK(t.rfind("0 violations were found out of 0 test cases\n", 0) == 0);
        CHECK(t.find("violation ratio: n/a") != std::string::npos);
        CHECK(report_json(empty).at("ratio").is_null());
    }
}

TEST_CASE("verdicts equal the brute-force table oracle") {
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> values(-5.0, 80.0);
    std::uniform_int_distribution<int> quantity(1, 40);

    std::vector<infer::ChangePropositions> all_props;
    for (const auto change : {infer::ChangeKind::decrease, infer::ChangeKind::increase}) {
        for (const auto modifier : {infer::Modifier::none, infer::Modifier::at_least,
                                    infer::Modifier::more_than, infer::Modifier::less_than}) {
            for (const auto unit : {infer::Unit::absolute, infer::Unit::percent}) {
                for (const bool negated : {false, true}) {
                    infer::ChangePropositions p;
                    p.change = change;
                    p.modifier = modifier;
                    if (modifier != infer::Modifier::none)
                        p.quantity = infer::Quantity{Rational(quantity(rng)), unit};
                    p.negated = negated;
                    all_props.push_back(p);
                }
            }
        }
    }
    infer::ChangePropositions same;
    same.change = infer::ChangeKind::same;
    same.behavior = infer::Behavior::steering;
    all_props.push_back(same);

    infer::DeltaThresholds deltas; // steering delta 1.39 matches the oracle
    int checked = 0;
    for (const auto& props : all_props) {
        const auto formula = infer::build_formula(props, deltas);
        for (int i = 0; i < 12; ++i) {
            const double x1 = values(rng);
            const double x2 = values(rng);
            const auto eval = infer::evaluate_formula(formula, x1, x2);
            CHECK(eval.pass == oracle_pair_passes(props, x1, x2));
            ++checked;
        }
    }
    CHECK(checked >= 200);
}

TEST_CASE("threshold sweep re-evaluates one manifest") {
    TempDir dir("sweep");
    // synthetic manifest with 20 generated cases
    std::string manifest;
    std::string csv = "image_id,behavior,value\n";
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> values(10.0, 70.0);
    for (int i = 0; i < 20; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "m%03d", i);
        auto c = make_case(id, true);
        nlohmann::ordered_json j;
        j["case_id"] = c.case_id;
        j["source"] = c.source;
        j["followups"] = c.followups;
        j["proposition"] = c.proposition;
        j["status"] = c.status;
        manifest += j.dump();
        manifest += '\n';
        const double x1 = values(rng), x2 = values(rng);
        csv += std::string(id) + ",speed," + std::to_string(x1) + "\n";
        csv += std::string(id) + "__f1,speed," + std::to_string(x2) + "\n";
    }
    write_text(dir.file("manifest.jsonl"), manifest);
    write_text(dir.file("preds.csv"), csv);

    config::Config cfg = base_config();
    cfg.model.predictions_csv = dir.file("preds.csv");

    const std::string rule_template =
        "If: a pedestrian appears on the roadside, Then: the ego-vehicle should slow down at "
        "least {T}%.";
    const std::vector<Rational> thresholds = {Rational(0),  Rational(10), Rational(20),
                                              Rational(30), Rational(40), Rational(50)};

    const auto rows = threshold_sweep(cfg, rule_template, thresholds, dir.file("manifest.jsonl"));
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].n_violations >= rows[i - 1].n_violations); // monotone
    }

    // single threshold equals a direct evaluation of the instantiated rule
    const auto single = threshold_sweep(cfg, rule_template, {Rational(30)},
                                        dir.file("manifest.jsonl"));
    const auto mr = parse(
        "If: a pedestrian appears on the roadside, Then: the ego-vehicle should slow down at "
        "least 30%.");
    const auto cases = engine::read_manifest(dir.file("manifest.jsonl"));
    const auto predictions = collect_predictions(cases, cfg.model, dir.file("scratch"));
    const auto direct = evaluate_campaign(mr, cases, predictions);
    CHECK(single[0].n_violations == direct.n_violations);

    CHECK_THROWS_WITH_AS(threshold_sweep(cfg, "no placeholder", thresholds,
                                         dir.file("manifest.jsonl")),
                         doctest::Contains("placeholder"), Error);

    const std::string csv_text = sweep_csv(rows);
    CHECK(csv_text.rfind("threshold,violations,ratio\n", 0) == 0);
    CHECK(sweep_json(rows).size() == 6);
}

TEST_CASE("sweep monotonicity holds across random prediction sets") {
    TempDir dir("sweep_prop");
    std::string manifest;
    for (int i = 0; i < 15; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "m%03d", i);
        auto c = make_case(id, true);
        nlohmann::ordered_json j;
        j["case_id"] = c.case_id;
        j["source"] = c.source;
        j["followups"] = c.followups;
        j["proposition"] = c.proposition;
        j["status"] = c.status;
        manifest += j.dump();
        manifest += '\n';
    }
    write_text(dir.file("manifest.jsonl"), manifest);

    const std::string rule_template =
        "If: a pedestrian appears on the roadside, Then: the ego-vehicle should slow down at "
        "least {T}%.";
    const std::vector<Rational> thresholds = {Rational(0),  Rational(10), Rational(20),
                                              Rational(30), Rational(40), Rational(50)};

    std::mt19937 rng(123);
    std::uniform_real_distribution<double> values(-10.0, 90.0);
    for (int trial = 0; trial < 25; ++trial) {
        std::string csv = "image_id,behavior,value\n";
        for (int i = 0; i < 15; ++i) {
            char id[16];
            std::snprintf(id, sizeof id, "m%03d", i);
            csv += std::string(id) + ",speed," + std::to_string(values(rng)) + "\n";
            csv += std::string(id) + "__f1,speed," + std::to_string(values(rng)) + "\n";
        }
        write_text(dir.file("preds.csv"), csv);
        config::Config cfg = base_config();
        cfg.model.predictions_csv = dir.file("preds.csv");
        const auto rows =
            threshold_sweep(cfg, rule_template, thresholds, dir.file("manifest.jsonl"));
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].n_violations >= rows[i - 1].n_violations);
        }
    }
}

TEST_CASE("run_campaign produces report files end to end") {
    TempDir dir("run");
    const std::string dataset = dir.file("dataset");
    std::filesystem::create_directories(dataset);
    for (int i = 0; i < 6; ++i) {
        scene::SemanticLabelMap map = road_scene(24, 12, 2, 16);
        if (i == 0) paint_rect(map, 1, 2, 2, 3, kPedestrian);
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03d.pgm", i);
        scene::save_map(map, dataset + "/" + name);
    }

    config::Config cfg = base_config();
    // constant model: reads the file-list argument, emits 50 km/h everywhere
    cfg.model.command =
        "awk 'BEGIN{print \"image_id,behavior,value\"} {stem=$0; sub(/.*\\//, \"\", stem); "
        "sub(/\\.pgm$/, \"\", stem); print stem \",speed,50\"; print stem \",steering,0\"}'";

    const auto report = run_campaign(cfg, golden_rules()[0], dataset, dir.file("out"));
    CHECK(report.n_cases == 6);
    CHECK(report.n_evaluated == report.n_cases - report.n_filtered);
    // constant model: every evaluated pair violates "should slow down"
    CHECK(report.n_violations == report.n_evaluated);
    CHECK(std::filesystem::exists(dir.file("out") + "/report.json"));
    CHECK(std::filesystem::exists(dir.file("out") + "/report.txt"));
    const std::string text = read_text(dir.file("out") + "/report.txt");
    CHECK(text.find("violations were found out of") != std::string::npos);
}
