#include "rmt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rmt/subprocess.hpp"

namespace rmt::harness {

namespace fs = std::filesystem;

namespace {

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise("IoError", "harness", "cannot write " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    fs::rename(tmp, path);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

double lookup(const PredictionTable& table, const std::string& image_id, infer::Behavior behavior) {
    const auto it = table.find({image_id, behavior});
    if (it == table.end())
        raise("MissingPrediction", "harness",
              "no " + infer::to_string(behavior) + " prediction for image '" + image_id + "'");
    return it->second;
}

} // namespace

PredictionTable parse_predictions_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line))
        raise("FormatError", "harness", "empty predictions CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "image_id,behavior,value")
        raise("FormatError", "harness",
              "predictions CSV must start with 'image_id,behavior,value', got '" + line + "'");

    PredictionTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            raise("FormatError", "harness",
                  "predictions CSV line " + std::to_string(lineno) + " is not id,behavior,value");
        const std::string image_id = line.substr(0, c1);
        const std::string behavior_text = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string value_text = line.substr(c2 + 1);
        infer::Behavior behavior;
        if (behavior_text == "speed") {
            behavior = infer::Behavior::speed;
        } else if (behavior_text == "steering") {
            behavior = infer::Behavior::steering;
        } else {
            raise("FormatError", "harness",
                  "unknown behavior '" + behavior_text + "' on line " + std::to_string(lineno));
        }
        double value = 0.0;
        try {
            value = std::stod(value_text);
        } catch (...) {
            raise("FormatError", "harness",
                  "bad value '" + value_text + "' on line " + std::to_string(lineno));
        }
        if (!std::isfinite(value))
            raise("FormatError", "harness", "non-finite value on line " + std::to_string(lineno));
        if (behavior == infer::Behavior::steering && std::fabs(value) > 25.0) {
            std::cerr << "warning: steering prediction " << value << " for '" << image_id
                      << "' is outside [-25, 25]\n";
        }
        table[{image_id, behavior}] = value;
    }
    return table;
}

PredictionTable collect_predictions(const std::vector<engine::GeneratedCase>& cases,
                                    const config::ModelSpec& model,
                                    const std::string& scratch_dir) {
    std::vector<std::string> needed_paths;
    for (const auto& c : cases) {
        if (!c.generated()) continue;
        needed_paths.push_back(c.source);
        for (const auto& f : c.followups) needed_paths.push_back(f);
    }

    std::string csv_text;
    if (!model.predictions_csv.empty()) {
        std::ifstream in(model.predictions_csv);
        if (!in)
            raise("IoError", "harness", "cannot read predictions CSV " + model.predictions_csv);
        csv_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else if (!model.command.empty()) {
        fs::create_directories(scratch_dir);
        const std::string list_path = scratch_dir + "/model_inputs.txt";
        std::string listing;
        for (const auto& p : needed_paths) {
            listing += p;
            listing += '\n';
        }
        write_file_atomic(list_path, listing);
        const auto result = proc::run_command(model.command + " " + list_path, 600, scratch_dir);
        if (result.timed_out || result.exit_code != 0)
            raise("ModelCommandFailed", "harness",
                  "model command exited " + std::to_string(result.exit_code) + ": " +
                      result.stderr_text);
        csv_text = result.stdout_text;
    } else {
        raise("SchemaError", "config",
              "validation needs either model.command or model.predictions_csv");
    }

    PredictionTable table = parse_predictions_csv(csv_text);
    // Missing records are an error, not a silent skip; probe both behaviors
    // lazily at evaluation time but require at least one record per image.
    for (const auto& path : needed_paths) {
        const std::string id = stem_of(path);
        if (!table.count({id, infer::Behavior::speed}) &&
            !table.count({id, infer::Behavior::steering}))
            raise("MissingPrediction", "harness", "no prediction for image '" + id + "'");
    }
    return table;
}

PairVerdict evaluate_case(const infer::MetamorphicRelation& mr, const std::string& case_id,
                          double x1, double x2, std::optional<double> x3) {
    if (mr.chained() && !x3)
        raise("ArityMismatch", "harness",
              "chained MR needs a prediction triple for case '" + case_id + "'");

    PairVerdict verdict;
    verdict.case_id = case_id;
    verdict.x1 = x1;
    verdict.x2 = x2;
    verdict.x3 = mr.chained() ? x3 : std::nullopt;

    for (std::size_t b = 0; b < mr.blocks.size(); ++b) {
        const double a = b == 0 ? x1 : x2;
        const double bb = b == 0 ? x2 : *x3;
        const auto eval = infer::evaluate_formula(mr.blocks[b].formula, a, bb);
        if (!eval.pass) {
            verdict.violation = true;
            verdict.degenerate = eval.degenerate;
            if (eval.failed_conjunct) {
                const auto& c = mr.blocks[b].formula.conjuncts[*eval.failed_conjunct];
                verdict.failed_conjunct = infer::lhs_string(c.lhs, static_cast<int>(b + 1)) +
                                          infer::to_string(c.op) + c.rhs.to_decimal_string();
            }
            break;
        }
    }
    return verdict;
}

ViolationReport evaluate_campaign(const infer::MetamorphicRelation& mr,
                                  const std::vector<engine::GeneratedCase>& cases,
                                  const PredictionTable& predictions) {
    ViolationReport report;
    report.rule_text = mr.rule_text;
    report.n_cases = cases.size();

    const infer::Behavior behavior = mr.blocks[0].formula.behavior;
    for (const auto& c : cases) {
        if (!c.generated()) {
            ++report.n_filtered;
            continue;
        }
        const double x1 = lookup(predictions, stem_of(c.source), behavior);
        const double x2 = lookup(predictions, stem_of(c.followups.at(0)), behavior);
        std::optional<double> x3;
        if (mr.chained()) x3 = lookup(predictions, stem_of(c.followups.at(1)), behavior);
        report.verdicts.push_back(evaluate_case(mr, c.case_id, x1, x2, x3));
    }
    std::sort(report.verdicts.begin(), report.verdicts.end(),
              [](const PairVerdict& a, const PairVerdict& b) { return a.case_id < b.case_id; });

    report.n_evaluated = report.verdicts.size();
    for (const auto& v : report.verdicts) {
        if (v.violation) ++report.n_violations;
    }
    if (report.n_evaluated > 0) {
        report.ratio =
            static_cast<double>(report.n_violations) / static_cast<double>(report.n_evaluated);
    }
    return report;
}

std::string report_text(const ViolationReport& report) {
    std::ostringstream out;
    out << report.n_violations << " violations were found out of " << report.n_evaluated
        << " test cases\n";
    out << "\n";
    out << "rule: " << report.rule_text << "\n";
    out << "cases: " << report.n_cases << "  filtered: " << report.n_filtered
        << "  evaluated: " << report.n_evaluated << "  violations: " << report.n_violations << "\n";
    if (report.ratio) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", *report.ratio * 100.0);
        out << "violation ratio: " << buf << "\n";
    } else {
        out << "violation ratio: n/a\n";
    }
    for (const auto& v : report.verdicts) {
        if (!v.violation) continue;
        out << "violation " << v.case_id << ": x1=" << v.x1 << " x2=" << v.x2;
        if (v.x3) out << " x3=" << *v.x3;
        if (v.degenerate) out << " (degenerate: x1=0)";
        if (v.failed_conjunct) out << " failed " << *v.failed_conjunct;
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json report_json(const ViolationReport& report) {
    nlohmann::ordered_json j;
    j["rule"] = report.rule_text;
    nlohmann::ordered_json counts;
    counts["cases"] = report.n_cases;
    counts["filtered"] = report.n_filtered;
    counts["evaluated"] = report.n_evaluated;
    counts["violations"] = report.n_violations;
    j["counts"] = counts;
    j["ratio"] = report.ratio ? nlohmann::ordered_json(*report.ratio)
                              : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
    for (const auto& v : report.verdicts) {
        nlohmann::ordered_json vj;
        vj["case_id"] = v.case_id;
        vj["x1"] = v.x1;
        vj["x2"] = v.x2;
        vj["x3"] = v.x3 ? nlohmann::ordered_json(*v.x3) : nlohmann::ordered_json(nullptr);
        vj["verdict"] = v.violation ? "violation" : "pass";
        vj["failed_conjunct"] = v.failed_conjunct ? nlohmann::ordered_json(*v.failed_conjunct)
                                                  : nlohmann::ordered_json(nullptr);
        vj["degenerate"] = v.degenerate;
        verdicts.push_back(vj);
    }
    j["verdicts"] = verdicts;
    return j;
}

void write_report_files(const ViolationReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_file_atomic(out_dir + "/report.txt", report_text(report));
    write_file_atomic(out_dir + "/report.json", report_json(report).dump(2) + "\n");
}

ViolationReport run_campaign(const config::Config& config, const std::string& rule_text,
                             const std::string& dataset_dir, const std::string& out_dir) {
    const auto parsed = infer::parse_rule(rule_text, config.ontology, config.parse_options());
    const auto campaign = engine::generate_campaign(config, parsed.mr, dataset_dir, out_dir);
    const auto predictions =
        collect_predictions(campaign.cases, config.model, out_dir + "/work/model");
    ViolationReport report = evaluate_campaign(parsed.mr, campaign.cases, predictions);
    write_report_files(report, out_dir);
    return report;
}

std::vector<SweepRow> threshold_sweep(const config::Config& config,
                                      const std::string& rule_template,
                                      const std::vector<Rational>& thresholds,
                                      const std::string& manifest_path) {
    if (rule_template.find("{T}") == std::string::npos)
        raise("SchemaError", "config", "rule template needs a {T} placeholder");
    const auto cases = engine::read_manifest(manifest_path);

    const std::string scratch =
        (fs::path(manifest_path).parent_path() / "work" / "model").string();
    const auto predictions = collect_predictions(cases, config.model, scratch);

    std::vector<SweepRow> rows;
    for (const auto& threshold : thresholds) {
        std::string rule = rule_template;
        const std::string needle = "{T}";
        std::size_t pos;
        while ((pos = rule.find(needle)) != std::string::npos) {
            rule.replace(pos, needle.size(), threshold.to_decimal_string());
        }
        const auto parsed = infer::parse_rule(rule, config.ontology, config.parse_options());
        const auto report = evaluate_campaign(parsed.mr, cases, predictions);
        rows.push_back({threshold, report.n_violations, report.ratio});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "threshold,violations,ratio\n";
    for (const auto& row : rows) {
        out += row.threshold.to_decimal_string();
        out += ',';
        out += std::to_string(row.n_violations);
        out += ',';
        if (row.ratio) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", *row.ratio);
            out += buf;
        } else {
            out += "n/a";
        }
        out += '\n';
    }
    return out;
}

nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json j;
        j["threshold"] = row.threshold.is_integer()
                             ? nlohmann::ordered_json(row.threshold.num())
                             : nlohmann::ordered_json(row.threshold.to_decimal_string());
        j["violations"] = row.n_violations;
        j["ratio"] = row.ratio ? nlohmann::ordered_json(*row.ratio) : nlohmann::ordered_json(nullptr);
        arr.push_back(j);
    }
    return arr;
}

} // namespace rmt::harness
