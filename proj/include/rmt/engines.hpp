#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "rmt/config.hpp"
#include "rmt/inference.hpp"
#include "rmt/labelmap.hpp"

namespace rmt::engine {

struct GeneratedCase {
    std::string case_id;
    std::string source; // source map path
    std::vector<std::string> followups;
    nlohmann::ordered_json proposition;
    std::string status; // "generated" or "filtered(<reason>)"

    bool generated() const { return status == "generated"; }
};

/// First declared spec supporting (kind, target element); declaration order
/// is the priority rule. Throws NoEngineSupports.
const config::EngineSpec& select_engine(const config::EngineRegistry& registry,
                                        const infer::TransformationProposition& proposition);

struct EngineRun {
    std::string status;   // "generated" or "filtered(...)"
    std::string work_dir; // per-case scratch directory
};

/// Applies one proposition to one source map, writing the follow-up to
/// `output_path`. Builtin engines call the scene operations; external
/// engines run the entry command with {input}/{input_map}/{proposition}/
/// {output} substituted. Exit 0 consumes the output, exit 2 means the engine
/// declined the case, anything else (or a timeout) is an EngineFailure.
EngineRun run_engine(const config::EngineSpec& spec, const std::string& source_map_path,
                     const infer::TransformationProposition& proposition,
                     const std::string& output_path, const std::string& work_root,
                     const scene::MaskGallery& gallery, const config::Thresholds& thresholds);

struct Campaign {
    std::vector<GeneratedCase> cases;
    std::string manifest_path;
    std::size_t n_generated = 0;
    std::size_t n_filtered = 0;
};

/// Applies the MR's proposition(s) to every map in dataset_dir; chained MRs
/// produce a second follow-up from the same source. Writes
/// `<out_dir>/manifest.jsonl` plus follow-up maps under `<out_dir>/followups`.
Campaign generate_campaign(const config::Config& config, const infer::MetamorphicRelation& mr,
                           const std::string& dataset_dir, const std::string& out_dir);

std::vector<GeneratedCase> read_manifest(const std::string& manifest_path);

} // namespace rmt::engine
