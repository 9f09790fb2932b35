#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmt/config.hpp"
#include "rmt/engines.hpp"
#include "rmt/inference.hpp"

namespace rmt::harness {

struct PredictionRecord {
    std::string image_id; // file stem
    infer::Behavior behavior = infer::Behavior::speed;
    double value = 0.0;
};

/// (image_id, behavior) -> value.
using PredictionTable = std::map<std::pair<std::string, infer::Behavior>, double>;

struct PairVerdict {
    std::string case_id;
    double x1 = 0.0;
    double x2 = 0.0;
    std::optional<double> x3;
    bool violation = false;
    std::optional<std::string> failed_conjunct;
    bool degenerate = false;
};

struct ViolationReport {
    std::string rule_text;
    std::size_t n_cases = 0;
    std::size_t n_filtered = 0;
    std::size_t n_evaluated = 0;
    std::size_t n_violations = 0;
    std::optional<double> ratio; // absent when nothing was evaluated
    std::vector<PairVerdict> verdicts; // sorted by case_id
};

PredictionTable parse_predictions_csv(const std::string& csv_text);

/// Predictions for every source and follow-up of every generated case,
/// either from the model command (invoked with a file-list argument) or a
/// precomputed CSV. Missing records raise MissingPrediction.
PredictionTable collect_predictions(const std::vector<engine::GeneratedCase>& cases,
                                    const config::ModelSpec& model,
                                    const std::string& scratch_dir);

PairVerdict evaluate_case(const infer::MetamorphicRelation& mr, const std::string& case_id,
                          double x1, double x2, std::optional<double> x3);

ViolationReport evaluate_campaign(const infer::MetamorphicRelation& mr,
                                  const std::vector<engine::GeneratedCase>& cases,
                                  const PredictionTable& predictions);

/// report.json + report.txt; the text report's first line is
/// "<violations> violations were found out of <evaluated> test cases".
void write_report_files(const ViolationReport& report, const std::string& out_dir);
std::string report_text(const ViolationReport& report);
nlohmann::ordered_json report_json(const ViolationReport& report);

/// Full pipeline: parse -> generate -> predict -> evaluate -> report.
ViolationReport run_campaign(const config::Config& config, const std::string& rule_text,
                             const std::string& dataset_dir, const std::string& out_dir);

struct SweepRow {
    Rational threshold;
    std::size_t n_violations = 0;
    std::optional<double> ratio;
};

/// Instantiates rule_template at each threshold ("{T}" placeholder) and
/// re-evaluates an existing campaign; predictions are collected once.
std::vector<SweepRow> threshold_sweep(const config::Config& config,
                                      const std::string& rule_template,
                                      const std::vector<Rational>& thresholds,
                                      const std::string& manifest_path);

std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows);

} // namespace rmt::harness
