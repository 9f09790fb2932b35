#include "rmt/config.hpp"

#include <fstream>

#include <yaml-cpp/yaml.h>

namespace rmt::config {

std::string to_string(EngineKind k) {
    switch (k) {
        case EngineKind::builtin_manipulation: return "builtin_manipulation";
        case EngineKind::builtin_label_edit: return "builtin_label_edit";
        case EngineKind::external: return "external";
    }
    return "external";
}

namespace {

EngineKind engine_kind_from_string(const std::string& s) {
    if (s == "builtin_manipulation") return EngineKind::builtin_manipulation;
    if (s == "builtin_label_edit") return EngineKind::builtin_label_edit;
    if (s == "external") return EngineKind::external;
    raise("SchemaError", "config", "unknown engine kind '" + s + "'");
}

infer::TransformKind transform_from_string(const std::string& s) {
    if (s == "add") return infer::TransformKind::add;
    if (s == "remove") return infer::TransformKind::remove;
    if (s == "replace") return infer::TransformKind::replace;
    raise("SchemaError", "config", "unknown transformation '" + s + "'");
}

Rational rational_from_node(const YAML::Node& node, const std::string& path) {
    try {
        return Rational::from_decimal_string(node.as<std::string>());
    } catch (const Error&) {
        raise("SchemaError", "config", path + " must be a decimal number");
    }
}

void parse_engines(Config& cfg, const YAML::Node& engines) {
    if (!engines.IsSequence()) raise("SchemaError", "config", "engines must be a sequence");
    cfg.engines.specs.clear();
    int idx = 0;
    for (const auto& node : engines) {
        const std::string path = "engines[" + std::to_string(idx++) + "]";
        EngineSpec spec;
        if (!node["name"]) raise("SchemaError", "config", path + ".name is required");
        spec.name = node["name"].as<std::string>();
        for (const auto& existing : cfg.engines.specs) {
            if (existing.name == spec.name)
                raise("SchemaError", "config", "duplicate engine name '" + spec.name + "'");
        }
        if (!node["kind"]) raise("SchemaError", "config", path + ".kind is required");
        spec.kind = engine_kind_from_string(node["kind"].as<std::string>());
        if (node["entry"]) spec.entry = node["entry"].as<std::string>();
        if (spec.kind == EngineKind::external && spec.entry.empty())
            raise("SchemaError", "config", path + ": external engines need an entry command");
        if (node["timeout_s"]) {
            spec.timeout_s = node["timeout_s"].as<int>();
            if (spec.timeout_s <= 0)
                raise("SchemaError", "config", path + ".timeout_s must be positive");
        }
        if (node["gallery"]) spec.gallery_dir = node["gallery"].as<std::string>();
        if (!node["support"] || !node["support"].IsSequence() || node["support"].size() == 0)
            raise("SchemaError", "config", path + ".support must be a non-empty sequence");
        for (const auto& sup : node["support"]) {
            EngineSupport support;
            if (!sup["transformation"])
                raise("SchemaError", "config", path + ".support entries need a transformation");
            support.transformation = transform_from_string(sup["transformation"].as<std::string>());
            if (!sup["elements"] || !sup["elements"].IsSequence())
                raise("SchemaError", "config", path + ".support entries need an elements list");
            for (const auto& e : sup["elements"]) support.elements.push_back(e.as<std::string>());
            spec.support.push_back(std::move(support));
        }
        cfg.engines.specs.push_back(std::move(spec));
    }
}

void parse_thresholds(Config& cfg, const YAML::Node& node) {
    if (!node.IsMap()) raise("SchemaError", "config", "thresholds must be a map");
    auto& t = cfg.thresholds;
    if (node["wup_threshold"]) t.wup_threshold = node["wup_threshold"].as<double>();
    if (node["delta_speed"]) t.delta_speed = rational_from_node(node["delta_speed"], "thresholds.delta_speed");
    if (node["delta_steering"])
        t.delta_steering = rational_from_node(node["delta_steering"], "thresholds.delta_steering");
    if (node["min_region_fraction"]) t.min_region_fraction = node["min_region_fraction"].as<double>();
    if (node["mse_min"]) t.mse_min = node["mse_min"].as<double>();
    if (node["closer_offset_fraction"])
        t.closer_offset_fraction = node["closer_offset_fraction"].as<double>();
    for (const double v : {t.wup_threshold, t.min_region_fraction, t.mse_min,
                           t.closer_offset_fraction, t.delta_speed.to_double(),
                           t.delta_steering.to_double()}) {
        if (v < 0) raise("SchemaError", "config", "thresholds must be nonnegative");
    }
}

} // namespace

EngineRegistry default_registry() {
    EngineRegistry registry;
    EngineSpec manipulation;
    manipulation.name = "builtin_manipulation";
    manipulation.kind = EngineKind::builtin_manipulation;
    manipulation.support.push_back(
        {infer::TransformKind::add,
         {"pedestrian", "bicyclist", "vehicle", "tree", "traffic sign", "traffic light"}});
    registry.specs.push_back(std::move(manipulation));

    EngineSpec label_edit;
    label_edit.name = "builtin_label_edit";
    label_edit.kind = EngineKind::builtin_label_edit;
    const std::vector<std::string> editable = {
        "line", "lane", "crosswalk", "sidewalk", "stop and yield line", "traffic sign",
        "traffic light", "tree", "building", "pedestrian", "vehicle", "bicyclist"};
    label_edit.support.push_back({infer::TransformKind::remove, editable});
    label_edit.support.push_back({infer::TransformKind::replace, editable});
    registry.specs.push_back(std::move(label_edit));
    return registry;
}

Config parse_config(const std::string& yaml_text) {
    Config cfg;
    cfg.ontology = onto::load_ontology(yaml_text);
    cfg.engines = default_registry();

    if (!yaml_text.empty()) {
        YAML::Node root;
        try {
            root = YAML::Load(yaml_text);
        } catch (const YAML::Exception& e) {
            raise("SchemaError", "config", std::string("invalid YAML: ") + e.what());
        }
        if (root["engines"]) parse_engines(cfg, root["engines"]);
        if (root["thresholds"]) parse_thresholds(cfg, root["thresholds"]);
        if (root["model"]) {
            const auto& model = root["model"];
            if (model["command"]) cfg.model.command = model["command"].as<std::string>();
            if (model["predictions_csv"])
                cfg.model.predictions_csv = model["predictions_csv"].as<std::string>();
            if (!cfg.model.command.empty() && !cfg.model.predictions_csv.empty())
                raise("SchemaError", "config",
                      "model: set exactly one of command and predictions_csv");
        }
        if (root["workers"]) {
            cfg.workers = root["workers"].as<int>();
            if (cfg.workers <= 0) raise("SchemaError", "config", "workers must be positive");
        }
    }
    return cfg;
}

Config load_config_file(const std::string& path) {
    if (path.empty()) return parse_config("");
    std::ifstream in(path);
    if (!in) raise("IoError", "config", "cannot read config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

} // namespace rmt::config
