#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmt/error.hpp"

namespace rmt::scene {

inline constexpr std::uint8_t kTransparentId = 255;

/// Pixel grid of class ids with a palette. Coordinates are bottom-left
/// origin: x grows rightward, y grows upward. PGM files store rows
/// top-to-bottom and are flipped on load/save.
struct SemanticLabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> grid; // grid[y * width + x]
    std::map<std::uint8_t, std::string> palette;

    std::uint8_t at(int x, int y) const { return grid[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t id) { grid[static_cast<std::size_t>(y) * width + x] = id; }

    std::optional<std::uint8_t> class_id(const std::string& name) const;
    std::size_t count(const std::string& name) const;

    /// Existing id for the class, or a fresh palette entry when absent.
    std::uint8_t ensure_class(const std::string& name);
};

struct Mask {
    std::string element;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> patch; // bottom-left origin, kTransparentId = hole
    std::string source_id;

    std::size_t solid_pixels() const;
};

struct MaskGallery {
    std::map<std::string, std::vector<Mask>> entries; // element -> masks by source_id

    const Mask* first_for(const std::string& element) const;
};

SemanticLabelMap load_map(const std::string& path);
void save_map(const SemanticLabelMap& map, const std::string& path);

Mask load_mask(const std::string& path);
void save_mask(const Mask& mask, const SemanticLabelMap& palette_source, const std::string& path);

/// Gallery from a directory of `<element>__<source>.pgm` mask files.
MaskGallery load_gallery(const std::string& dir);

/// Gallery scraped from dataset maps: the largest blob of every ontology
/// class found in each map.
MaskGallery build_gallery_from_maps(const std::vector<std::string>& map_paths,
                                    const std::vector<std::string>& element_names);

/// Largest 4-connected component of the class, cropped to its bounding box;
/// nullopt when the class has zero pixels.
std::optional<Mask> extract_mask(const SemanticLabelMap& map, const std::string& class_name);

/// Placement for an add: the base row is the highest row with a
/// road->non-road transition, then the smallest x' satisfying
///   M(x'-1, y) = road,  M(x', y) != road,  x' + w' <= w.
/// `closer` first shifts the base row down by ceil(offset_fraction * height).
std::optional<std::pair<int, int>> place_mask_add(const SemanticLabelMap& map, const Mask& mask,
                                                  const std::string& reference_class, bool closer,
                                                  double closer_offset_fraction = 0.15);

SemanticLabelMap apply_add(const SemanticLabelMap& map, const Mask& mask, int x, int y);
SemanticLabelMap apply_remove(const SemanticLabelMap& map, const std::string& target_class);
SemanticLabelMap apply_replace(const SemanticLabelMap& map, const std::string& target_class,
                               const std::string& new_class);

struct FilterResult {
    bool pass = true;
    std::string reason; // "occupied", "too_small", "already_in_domain"
};

struct Rect {
    int x = 0, y = 0, width = 0, height = 0;
};

FilterResult filter_add(const SemanticLabelMap& map, const Rect& rect);
FilterResult filter_region(const SemanticLabelMap& map, const std::string& class_name,
                           double min_region_fraction = 0.005);
FilterResult filter_translation(const std::vector<std::uint8_t>& original_pixels,
                                const std::vector<std::uint8_t>& generated_pixels,
                                double mse_min = 100.0);

} // namespace rmt::scene
