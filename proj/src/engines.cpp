#include "rmt/engines.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "rmt/subprocess.hpp"

namespace rmt::engine {

namespace fs = std::filesystem;

namespace {

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise("IoError", "engine", "cannot write " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    fs::rename(tmp, path);
}

std::string substitute(std::string tpl, const std::string& key, const std::string& value) {
    const std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = tpl.find(needle, pos)) != std::string::npos) {
        tpl.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return tpl;
}

std::string filtered(const std::string& reason) { return "filtered(" + reason + ")"; }

EngineRun run_builtin_manipulation(const std::string& source_map_path,
                                   const infer::TransformationProposition& prop,
                                   const std::string& output_path,
                                   const scene::MaskGallery& gallery,
                                   const config::Thresholds& thresholds) {
    if (prop.kind != infer::TransformKind::add)
        raise("EngineFailure", "engine", "builtin_manipulation only implements add");
    const scene::SemanticLabelMap map = scene::load_map(source_map_path);
    const scene::Mask* mask = gallery.first_for(prop.target.element);
    if (!mask) return {filtered("no_mask"), ""};

    const std::string reference =
        prop.reference ? prop.reference->element : std::string("sidewalk");
    const bool closer = prop.comparative && *prop.comparative == "closer";
    const auto pos = scene::place_mask_add(map, *mask, reference, closer,
                                           thresholds.closer_offset_fraction);
    if (!pos) return {filtered("no_position"), ""};

    const scene::Rect rect{pos->first, pos->second, mask->width, mask->height};
    if (const auto check = scene::filter_add(map, rect); !check.pass)
        return {filtered(check.reason), ""};

    scene::save_map(scene::apply_add(map, *mask, pos->first, pos->second), output_path);
    return {"generated", ""};
}

EngineRun run_builtin_label_edit(const std::string& source_map_path,
                                 const infer::TransformationProposition& prop,
                                 const std::string& output_path,
                                 const config::Thresholds& thresholds) {
    const scene::SemanticLabelMap map = scene::load_map(source_map_path);
    const std::string& target = prop.target.element;
    if (!map.class_id(target)) return {filtered("too_small"), ""};
    if (const auto check = scene::filter_region(map, target, thresholds.min_region_fraction);
        !check.pass)
        return {filtered(check.reason), ""};

    if (prop.kind == infer::TransformKind::remove) {
        scene::save_map(scene::apply_remove(map, target), output_path);
    } else if (prop.kind == infer::TransformKind::replace) {
        if (!prop.reference)
            raise("EngineFailure", "engine", "replace proposition lacks a replacement entity");
        scene::save_map(scene::apply_replace(map, target, prop.reference->element), output_path);
    } else {
        raise("EngineFailure", "engine", "builtin_label_edit implements remove and replace");
    }
    return {"generated", ""};
}

EngineRun run_external(const config::EngineSpec& spec, const std::string& source_map_path,
                       const infer::TransformationProposition& prop,
                       const std::string& output_path, const std::string& work_dir,
                       const config::Thresholds& thresholds) {
    fs::create_directories(work_dir);
    const std::string prop_path = work_dir + "/proposition.json";
    write_file_atomic(prop_path, infer::proposition_to_json(prop).dump() + "\n");

    std::string command = spec.entry;
    command = substitute(command, "input", source_map_path);
    command = substitute(command, "input_map", source_map_path);
    command = substitute(command, "proposition", prop_path);
    command = substitute(command, "output", output_path);

    const auto result = proc::run_command(command, spec.timeout_s, work_dir);
    if (result.timed_out)
        raise("Timeout", "engine",
              "engine '" + spec.name + "' exceeded " + std::to_string(spec.timeout_s) + "s");
    if (result.exit_code == 2) return {filtered("engine_declined"), work_dir};
    if (result.exit_code != 0)
        raise("EngineFailure", "engine",
              "engine '" + spec.name + "' exited " + std::to_string(result.exit_code) + ": " +
                  result.stderr_text);
    if (!fs::exists(output_path))
        raise("EngineFailure", "engine",
              "engine '" + spec.name + "' exited 0 without writing " + output_path);

    // Translation engines may hand back a scene that is already in the target
    // domain; compare raw intensities when both sides are readable maps.
    if (prop.replace_kind && (*prop.replace_kind == infer::ReplaceKind::weather ||
                              *prop.replace_kind == infer::ReplaceKind::time)) {
        try {
            const auto original = scene::load_map(source_map_path);
            const auto generated = scene::load_map(output_path);
            const auto check =
                scene::filter_translation(original.grid, generated.grid, thresholds.mse_min);
            if (!check.pass) return {filtered(check.reason), work_dir};
        } catch (const Error&) {
            // Non-PGM output; leave domain filtering to the engine.
        }
    }
    return {"generated", work_dir};
}

} // namespace

const config::EngineSpec& select_engine(const config::EngineRegistry& registry,
                                        const infer::TransformationProposition& proposition) {
    for (const auto& spec : registry.specs) {
        for (const auto& support : spec.support) {
            if (support.transformation != proposition.kind) continue;
            for (const auto& element : support.elements) {
                if (element == proposition.target.element) return spec;
            }
        }
    }
    raise("NoEngineSupports", "engine",
          "no engine supports " + infer::to_string(proposition.kind) + "/" +
              proposition.target.element);
}

EngineRun run_engine(const config::EngineSpec& spec, const std::string& source_map_path,
                     const infer::TransformationProposition& proposition,
                     const std::string& output_path, const std::string& work_root,
                     const scene::MaskGallery& gallery, const config::Thresholds& thresholds) {
    switch (spec.kind) {
        case config::EngineKind::builtin_manipulation:
            return run_builtin_manipulation(source_map_path, proposition, output_path, gallery,
                                            thresholds);
        case config::EngineKind::builtin_label_edit:
            return run_builtin_label_edit(source_map_path, proposition, output_path, thresholds);
        case config::EngineKind::external:
            return run_external(spec, source_map_path, proposition, output_path, work_root,
                                thresholds);
    }
    raise("EngineFailure", "engine", "unreachable engine kind");
}

namespace {

nlohmann::ordered_json case_to_json(const GeneratedCase& c) {
    nlohmann::ordered_json j;
    j["case_id"] = c.case_id;
    j["source"] = c.source;
    j["followups"] = c.followups;
    j["proposition"] = c.proposition;
    j["status"] = c.status;
    return j;
}

} // namespace

Campaign generate_campaign(const config::Config& config, const infer::MetamorphicRelation& mr,
                           const std::string& dataset_dir, const std::string& out_dir) {
    std::vector<std::string> sources;
    if (fs::is_directory(dataset_dir)) {
        for (const auto& entry : fs::directory_iterator(dataset_dir)) {
            if (entry.path().extension() == ".pgm") sources.push_back(entry.path().string());
        }
    }
    std::sort(sources.begin(), sources.end());
    if (sources.empty())
        raise("EmptyDataset", "engine", "no label maps (*.pgm) found in " + dataset_dir);

    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/followups");
    fs::create_directories(out_dir + "/work");

    // Resolve one engine per block up front so configuration gaps surface
    // before any generation work starts.
    std::vector<const config::EngineSpec*> engines;
    for (const auto& block : mr.blocks)
        engines.push_back(&select_engine(config.engines, block.proposition));

    scene::MaskGallery gallery;
    bool needs_gallery = false;
    std::string gallery_dir;
    for (const auto* spec : engines) {
        if (spec->kind == config::EngineKind::builtin_manipulation) {
            needs_gallery = true;
            if (!spec->gallery_dir.empty()) gallery_dir = spec->gallery_dir;
        }
    }
    if (needs_gallery) {
        gallery = gallery_dir.empty()
                      ? scene::build_gallery_from_maps(sources, config.ontology.element_names())
                      : scene::load_gallery(gallery_dir);
    }

    std::vector<GeneratedCase> cases(sources.size());
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto process = [&](std::size_t index) {
        const std::string& source = sources[index];
        const std::string stem = fs::path(source).stem().string();
        GeneratedCase item;
        item.case_id = stem;
        item.source = source;
        if (mr.chained()) {
            nlohmann::ordered_json props = nlohmann::ordered_json::array();
            for (const auto& block : mr.blocks)
                props.push_back(infer::proposition_to_json(block.proposition));
            item.proposition = props;
        } else {
            item.proposition = infer::proposition_to_json(mr.blocks[0].proposition);
        }

        item.status = "generated";
        for (std::size_t b = 0; b < mr.blocks.size(); ++b) {
            const std::string followup =
                out_dir + "/followups/" + stem + "__f" + std::to_string(b + 1) + ".pgm";
            const std::string work = out_dir + "/work/" + stem + "_b" + std::to_string(b + 1);
            const auto run = run_engine(*engines[b], source, mr.blocks[b].proposition, followup,
                                        work, gallery, config.thresholds);
            if (run.status != "generated") {
                item.status = run.status;
                item.followups.clear();
                break;
            }
            item.followups.push_back(followup);
        }
        cases[index] = std::move(item);
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1 || sources.size() < 2) {
        for (std::size_t i = 0; i < sources.size(); ++i) process(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cases.size()) return;
                    try {
                        process(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    Campaign campaign;
    campaign.cases = std::move(cases);
    std::string manifest;
    for (const auto& c : campaign.cases) {
        manifest += case_to_json(c).dump();
        manifest += '\n';
        if (c.generated()) {
            ++campaign.n_generated;
        } else {
            ++campaign.n_filtered;
        }
    }
    campaign.manifest_path = out_dir + "/manifest.jsonl";
    write_file_atomic(campaign.manifest_path, manifest);
    // the validator reconstructs the MR from the rule text alone
    write_file_atomic(out_dir + "/rule.txt", mr.rule_text + "\n");
    return campaign;
}

std::vector<GeneratedCase> read_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) raise("IoError", "engine", "cannot read manifest " + manifest_path);
    std::vector<GeneratedCase> cases;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise("FormatError", "engine", manifest_path + ": " + e.what());
        }
        GeneratedCase c;
        c.case_id = j.at("case_id").get<std::string>();
        c.source = j.at("source").get<std::string>();
        c.followups = j.at("followups").get<std::vector<std::string>>();
        c.proposition = j.at("proposition");
        c.status = j.at("status").get<std::string>();
        cases.push_back(std::move(c));
    }
    return cases;
}

} // namespace rmt::engine
