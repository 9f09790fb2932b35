#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "rmt/config.hpp"
#include "rmt/engines.hpp"
#include "rmt/harness.hpp"
#include "rmt/inference.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolations = 3;

std::string read_rule_argument(const std::string& arg) {
    if (fs::is_regular_file(arg)) {
        std::ifstream in(arg);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return text;
    }
    return arg;
}

rmt::config::Config load_config(const std::string& flag_value) {
    std::string path = flag_value;
    if (path.empty()) {
        if (const char* env = std::getenv("RMT_CONFIG")) path = env;
    }
    return rmt::config::load_config_file(path);
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    fs::rename(tmp, path);
}

std::vector<rmt::Rational> parse_threshold_list(const std::string& csv) {
    std::vector<rmt::Rational> out;
    std::string current;
    for (const char c : csv + ",") {
        if (c == ',') {
            if (!current.empty()) out.push_back(rmt::Rational::from_decimal_string(current));
            current.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            current += c;
        }
    }
    if (out.empty()) rmt::raise("SchemaError", "config", "empty threshold list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rmt - declarative metamorphic testing for driving models"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "YAML configuration file (or $RMT_CONFIG)");

    // parse
    auto* cmd_parse = app.add_subcommand("parse", "Parse a testing rule");
    std::string parse_rule_arg;
    bool dump_deps = false, emit_mr = false;
    cmd_parse->add_option("--rule", parse_rule_arg, "Rule text or a file containing it")->required();
    cmd_parse->add_flag("--dump-deps", dump_deps, "Emit dependency predicates as JSON lines");
    cmd_parse->add_flag("--emit-mr", emit_mr, "Emit the metamorphic relation as canonical JSON");

    // generate
    auto* cmd_generate = app.add_subcommand("generate", "Generate follow-up test cases");
    std::string gen_rule, gen_dataset, gen_out;
    cmd_generate->add_option("--rule", gen_rule, "Rule text or file")->required();
    cmd_generate->add_option("--dataset", gen_dataset, "Directory of label maps (*.pgm)")->required();
    cmd_generate->add_option("--out", gen_out, "Output directory")->required();

    // validate
    auto* cmd_validate = app.add_subcommand("validate", "Evaluate an existing campaign");
    std::string val_manifest, val_rule, val_out;
    cmd_validate->add_option("--manifest", val_manifest, "Campaign manifest (JSON lines)")->required();
    cmd_validate->add_option("--rule", val_rule,
                             "Rule text or file (default: rule.txt beside the manifest)");
    cmd_validate->add_option("--out", val_out, "Report directory (default: manifest directory)");

    // sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "Threshold sensitivity sweep");
    std::string sweep_template, sweep_thresholds, sweep_manifest, sweep_out;
    cmd_sweep->add_option("--rule-template", sweep_template, "Rule with a {T} placeholder")
        ->required();
    cmd_sweep->add_option("--thresholds", sweep_thresholds, "Comma-separated thresholds")->required();
    cmd_sweep->add_option("--manifest", sweep_manifest, "Campaign manifest")->required();
    cmd_sweep->add_option("--out", sweep_out, "Output directory (default: manifest directory)");

    // ontology
    auto* cmd_ontology = app.add_subcommand("ontology", "Ontology utilities");
    auto* cmd_ontology_show = cmd_ontology->add_subcommand("show", "Print the merged ontology");
    cmd_ontology->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        const rmt::config::Config config = load_config(config_path);

        if (cmd_parse->parsed()) {
            const std::string rule_text = read_rule_argument(parse_rule_arg);
            if (dump_deps) {
                rmt::lang::PosLexicon lexicon = rmt::lang::PosLexicon::defaults();
                config.ontology.extend_pos_lexicon(lexicon);
                auto blocks = rmt::lang::split_blocks(rule_text, lexicon);
                std::string out;
                for (auto& block : blocks) {
                    block.if_clause = rmt::lang::pos_tag(std::move(block.if_clause), lexicon);
                    block.then_clause = rmt::lang::pos_tag(std::move(block.then_clause), lexicon);
                    out += rmt::infer::dump_dependencies_jsonl(
                        rmt::lang::extract_dependencies(block.if_clause));
                    try {
                        out += rmt::infer::dump_dependencies_jsonl(
                            rmt::lang::extract_dependencies(block.then_clause));
                    } catch (const rmt::Error& e) {
                        if (e.kind() != "NoRootVerb") throw;
                    }
                }
                std::cout << out;
            }
            const auto parsed =
                rmt::infer::parse_rule(rule_text, config.ontology, config.parse_options());
            for (const auto& warning : parsed.warnings) {
                std::cerr << "warning: " << warning << "\n";
            }
            if (emit_mr || !dump_deps) {
                std::cout << rmt::infer::mr_to_json(parsed.mr).dump() << "\n";
            }
            return kExitOk;
        }

        if (cmd_generate->parsed()) {
            const std::string rule_text = read_rule_argument(gen_rule);
            const auto parsed =
                rmt::infer::parse_rule(rule_text, config.ontology, config.parse_options());
            const auto campaign =
                rmt::engine::generate_campaign(config, parsed.mr, gen_dataset, gen_out);
            std::cout << "generated " << campaign.n_generated << " follow-up case(s), filtered "
                      << campaign.n_filtered << "; manifest: " << campaign.manifest_path << "\n";
            return kExitOk;
        }

        if (cmd_validate->parsed()) {
            std::string rule_source = val_rule;
            if (rule_source.empty()) {
                const auto beside =
                    fs::path(val_manifest).parent_path() / "rule.txt";
                if (!fs::is_regular_file(beside))
                    rmt::raise("MalformedRule", "config",
                               "no --rule given and no rule.txt beside the manifest");
                rule_source = beside.string();
            }
            const std::string rule_text = read_rule_argument(rule_source);
            const auto parsed =
                rmt::infer::parse_rule(rule_text, config.ontology, config.parse_options());
            const auto cases = rmt::engine::read_manifest(val_manifest);
            const std::string out_dir =
                val_out.empty() ? fs::path(val_manifest).parent_path().string() : val_out;
            const auto predictions = rmt::harness::collect_predictions(
                cases, config.model, out_dir + "/work/model");
            const auto report = rmt::harness::evaluate_campaign(parsed.mr, cases, predictions);
            rmt::harness::write_report_files(report, out_dir);
            std::cout << rmt::harness::report_text(report);
            return report.n_violations > 0 ? kExitViolations : kExitOk;
        }

        if (cmd_sweep->parsed()) {
            const auto thresholds = parse_threshold_list(sweep_thresholds);
            const auto rows = rmt::harness::threshold_sweep(
                config, read_rule_argument(sweep_template), thresholds, sweep_manifest);
            const std::string out_dir =
                sweep_out.empty() ? fs::path(sweep_manifest).parent_path().string() : sweep_out;
            fs::create_directories(out_dir);
            write_atomic(out_dir + "/sweep.csv", rmt::harness::sweep_csv(rows));
            write_atomic(out_dir + "/sweep.json",
                         rmt::harness::sweep_json(rows).dump(2) + "\n");
            std::cout << rmt::harness::sweep_csv(rows);
            return kExitOk;
        }

        if (cmd_ontology_show->parsed()) {
            std::cout << rmt::onto::format_ontology_table(config.ontology);
            return kExitOk;
        }
    } catch (const rmt::Error& e) {
        std::cerr << "error [" << e.stage() << "] " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
