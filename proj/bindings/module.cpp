#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rmt/config.hpp"
#include "rmt/engines.hpp"
#include "rmt/harness.hpp"
#include "rmt/inference.hpp"
#include "rmt/labelmap.hpp"

namespace py = pybind11;

namespace {

rmt::config::Config make_config(const std::string& config_yaml) {
    return rmt::config::parse_config(config_yaml);
}

const rmt::config::Config& default_config() {
    static const rmt::config::Config cfg = make_config("");
    return cfg;
}

const rmt::config::Config& config_for(const std::string& config_yaml) {
    // The default configuration is hot; ad-hoc documents are parsed per call.
    static thread_local rmt::config::Config scratch;
    if (config_yaml.empty()) return default_config();
    scratch = make_config(config_yaml);
    return scratch;
}

std::string parse_rule_json(const std::string& rule_text, const std::string& config_yaml) {
    const auto& cfg = config_for(config_yaml);
    const auto parsed = rmt::infer::parse_rule(rule_text, cfg.ontology, cfg.parse_options());
    return rmt::infer::mr_to_json(parsed.mr).dump();
}

std::string dump_dependencies(const std::string& rule_text, const std::string& config_yaml) {
    const auto& cfg = config_for(config_yaml);
    rmt::lang::PosLexicon lexicon = rmt::lang::PosLexicon::defaults();
    cfg.ontology.extend_pos_lexicon(lexicon);
    std::string out;
    for (auto& block : rmt::lang::split_blocks(rule_text, lexicon)) {
        block.if_clause = rmt::lang::pos_tag(std::move(block.if_clause), lexicon);
        block.then_clause = rmt::lang::pos_tag(std::move(block.then_clause), lexicon);
        out += rmt::infer::dump_dependencies_jsonl(
            rmt::lang::extract_dependencies(block.if_clause));
        try {
            out += rmt::infer::dump_dependencies_jsonl(
                rmt::lang::extract_dependencies(block.then_clause));
        } catch (const rmt::Error& e) {
            if (e.kind() != std::string("NoRootVerb")) throw;
        }
    }
    return out;
}

double wup(const std::string& a, const std::string& b, const std::string& config_yaml) {
    return rmt::onto::wup_similarity(a, b, config_for(config_yaml).ontology.taxonomy);
}

py::object match_element(const std::string& word, const std::string& config_yaml) {
    const auto& cfg = config_for(config_yaml);
    rmt::lang::Token token;
    token.text = word;
    rmt::lang::PosLexicon lexicon = rmt::lang::PosLexicon::defaults();
    cfg.ontology.extend_pos_lexicon(lexicon);
    token.lemma = rmt::lang::lemmatize(word, lexicon);
    token.pos = rmt::lang::Pos::Noun;
    const auto matched =
        rmt::onto::match_element(token, cfg.ontology, cfg.thresholds.wup_threshold);
    if (!matched) return py::none();
    py::dict out;
    out["element"] = matched->element;
    out["similarity"] = matched->similarity;
    py::dict props;
    for (const auto& [k, v] : matched->bound_properties) props[py::str(k)] = v;
    out["properties"] = props;
    return out;
}

py::dict evaluate_rule(const std::string& rule_text, double x1, double x2,
                       const py::object& x3_obj, const std::string& config_yaml) {
    const auto& cfg = config_for(config_yaml);
    const auto parsed = rmt::infer::parse_rule(rule_text, cfg.ontology, cfg.parse_options());
    std::optional<double> x3;
    if (!x3_obj.is_none()) x3 = x3_obj.cast<double>();
    const auto verdict = rmt::harness::evaluate_case(parsed.mr, "case", x1, x2, x3);
    py::dict out;
    out["violation"] = verdict.violation;
    out["degenerate"] = verdict.degenerate;
    out["failed_conjunct"] =
        verdict.failed_conjunct ? py::cast(*verdict.failed_conjunct) : py::none().cast<py::object>();
    return out;
}

std::string run_campaign(const std::string& config_path, const std::string& rule_text,
                         const std::string& dataset_dir, const std::string& out_dir) {
    const auto cfg = rmt::config::load_config_file(config_path);
    const auto report = rmt::harness::run_campaign(cfg, rule_text, dataset_dir, out_dir);
    return rmt::harness::report_json(report).dump();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Declarative metamorphic testing for driving models";

    py::register_exception<rmt::Error>(m, "RmtError");

    m.def("parse_rule_json", &parse_rule_json, py::arg("rule_text"), py::arg("config_yaml") = "",
          "Parse a testing rule into its canonical metamorphic-relation JSON.");
    m.def("dump_dependencies", &dump_dependencies, py::arg("rule_text"),
          py::arg("config_yaml") = "",
          "Dependency predicates of every clause, one JSON object per line.");
    m.def("wup_similarity", &wup, py::arg("a"), py::arg("b"), py::arg("config_yaml") = "");
    m.def("match_element", &match_element, py::arg("word"), py::arg("config_yaml") = "");
    m.def("evaluate_rule", &evaluate_rule, py::arg("rule_text"), py::arg("x1"), py::arg("x2"),
          py::arg("x3") = py::none(), py::arg("config_yaml") = "",
          "Evaluate one prediction pair (or triple) against a rule's MR.");
    m.def("run_campaign", &run_campaign, py::arg("config_path"), py::arg("rule_text"),
          py::arg("dataset_dir"), py::arg("out_dir"),
          "Full pipeline: parse, generate, predict, evaluate; returns the report JSON.");

    py::class_<rmt::scene::SemanticLabelMap>(m, "LabelMap")
        .def(py::init([](int width, int height, py::bytes grid, const py::dict& palette) {
                 rmt::scene::SemanticLabelMap map;
                 map.width = width;
                 map.height = height;
                 const std::string data = grid;
                 if (static_cast<int>(data.size()) != width * height)
                     throw rmt::Error("FormatError", "scene", "grid size != width*height");
                 map.grid.assign(data.begin(), data.end());
                 for (const auto& item : palette) {
                     map.palette[static_cast<std::uint8_t>(item.first.cast<int>())] =
                         item.second.cast<std::string>();
                 }
                 return map;
             }),
             py::arg("width"), py::arg("height"), py::arg("grid"), py::arg("palette"))
        .def_static("load", &rmt::scene::load_map, py::arg("path"))
        .def("save", [](const rmt::scene::SemanticLabelMap& map,
                        const std::string& path) { rmt::scene::save_map(map, path); })
        .def_readonly("width", &rmt::scene::SemanticLabelMap::width)
        .def_readonly("height", &rmt::scene::SemanticLabelMap::height)
        .def("count", &rmt::scene::SemanticLabelMap::count, py::arg("class_name"))
        .def("at", &rmt::scene::SemanticLabelMap::at, py::arg("x"), py::arg("y"));

    py::class_<rmt::scene::Mask>(m, "Mask")
        .def_readonly("element", &rmt::scene::Mask::element)
        .def_readonly("width", &rmt::scene::Mask::width)
        .def_readonly("height", &rmt::scene::Mask::height)
        .def("solid_pixels", &rmt::scene::Mask::solid_pixels);

    m.def(
        "extract_mask",
        [](const rmt::scene::SemanticLabelMap& map, const std::string& class_name) -> py::object {
            const auto mask = rmt::scene::extract_mask(map, class_name);
            if (!mask) return py::none();
            return py::cast(*mask);
        },
        py::arg("map"), py::arg("class_name"));
    m.def(
        "place_mask_add",
        [](const rmt::scene::SemanticLabelMap& map, const rmt::scene::Mask& mask,
           const std::string& reference, bool closer, double offset) -> py::object {
            const auto pos = rmt::scene::place_mask_add(map, mask, reference, closer, offset);
            if (!pos) return py::none();
            return py::make_tuple(pos->first, pos->second);
        },
        py::arg("map"), py::arg("mask"), py::arg("reference_class"), py::arg("closer") = false,
        py::arg("closer_offset_fraction") = 0.15);
    m.def("apply_add", &rmt::scene::apply_add, py::arg("map"), py::arg("mask"), py::arg("x"),
          py::arg("y"));
    m.def("apply_remove", &rmt::scene::apply_remove, py::arg("map"), py::arg("target_class"));
    m.def("apply_replace", &rmt::scene::apply_replace, py::arg("map"), py::arg("target_class"),
          py::arg("new_class"));
}
