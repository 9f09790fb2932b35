#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmt/inference.hpp"
#include "rmt/ontology.hpp"
#include "rmt/rational.hpp"

namespace rmt::config {

enum class EngineKind { builtin_manipulation, builtin_label_edit, external };

std::string to_string(EngineKind k);

struct EngineSupport {
    infer::TransformKind transformation = infer::TransformKind::add;
    std::vector<std::string> elements;
};

struct EngineSpec {
    std::string name;
    EngineKind kind = EngineKind::builtin_manipulation;
    std::string entry; // command template, external engines only
    std::vector<EngineSupport> support;
    int timeout_s = 120;
    std::string gallery_dir; // optional, builtin_manipulation
};

struct EngineRegistry {
    std::vector<EngineSpec> specs; // declaration order is priority order
};

struct Thresholds {
    double wup_threshold = 0.75;
    Rational delta_speed{0};
    Rational delta_steering{139, 100};
    double min_region_fraction = 0.005;
    double mse_min = 100.0;
    double closer_offset_fraction = 0.15;
};

struct ModelSpec {
    std::string command;         // prints predictions CSV given a file-list argument
    std::string predictions_csv; // or a precomputed CSV
};

struct Config {
    onto::Ontology ontology;
    EngineRegistry engines;
    Thresholds thresholds;
    ModelSpec model;
    int workers = 1;

    infer::ParseOptions parse_options() const {
        infer::ParseOptions opts;
        opts.wup_threshold = thresholds.wup_threshold;
        opts.deltas.speed = thresholds.delta_speed;
        opts.deltas.steering = thresholds.delta_steering;
        return opts;
    }
};

/// Engines available when the config has no engines section: the built-in
/// manipulation engine for adds and the label-edit engine for remove/replace
/// of object classes. Environment replacements need an external engine.
EngineRegistry default_registry();

Config parse_config(const std::string& yaml_text);
Config load_config_file(const std::string& path); // empty path -> defaults

} // namespace rmt::config
