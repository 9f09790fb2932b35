#include "rmt/labelmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

namespace rmt::scene {

namespace fs = std::filesystem;

namespace {

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise("IoError", "scene", "cannot write " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise("IoError", "scene", "cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// P5 header: magic, whitespace/comments, width, height, maxval, single
// whitespace byte, then raw data.
struct PgmData {
    int width = 0, height = 0;
    std::vector<std::uint8_t> rows_top_down;
};

PgmData parse_pgm(const std::string& path) {
    const std::string data = read_file(path);
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < data.size()) {
            if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_int = [&]() -> long {
        skip_space();
        long value = 0;
        bool any = false;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
            value = value * 10 + (data[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) raise("FormatError", "scene", path + ": malformed PGM header");
        return value;
    };

    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
        raise("FormatError", "scene", path + ": not a binary PGM (P5) file");
    pos = 2;
    PgmData pgm;
    pgm.width = static_cast<int>(read_int());
    pgm.height = static_cast<int>(read_int());
    const long maxval = read_int();
    if (maxval != 255)
        raise("FormatError", "scene",
              path + ": maxval " + std::to_string(maxval) + " unsupported (need 255)");
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
        raise("FormatError", "scene", path + ": malformed PGM header");
    ++pos;
    const std::size_t expected = static_cast<std::size_t>(pgm.width) * pgm.height;
    if (data.size() - pos < expected)
        raise("FormatError", "scene", path + ": truncated pixel data");
    pgm.rows_top_down.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                             data.begin() + static_cast<std::ptrdiff_t>(pos + expected));
    return pgm;
}

std::string pgm_bytes(int width, int height, const std::vector<std::uint8_t>& rows_top_down) {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(rows_top_down.data()), rows_top_down.size());
    return out;
}

std::vector<std::uint8_t> flip_rows(const std::vector<std::uint8_t>& data, int width, int height) {
    std::vector<std::uint8_t> out(data.size());
    for (int y = 0; y < height; ++y) {
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(y) * width, width,
                    out.begin() + static_cast<std::ptrdiff_t>(height - 1 - y) * width);
    }
    return out;
}

std::map<std::uint8_t, std::string> load_palette(const std::string& sidecar_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(sidecar_path));
    } catch (const nlohmann::json::exception& e) {
        raise("FormatError", "scene", sidecar_path + ": " + e.what());
    }
    if (!j.is_object()) raise("FormatError", "scene", sidecar_path + ": palette must be an object");
    std::map<std::uint8_t, std::string> palette;
    for (const auto& [key, value] : j.items()) {
        int id = -1;
        try {
            id = std::stoi(key);
        } catch (...) {
            raise("FormatError", "scene", sidecar_path + ": non-numeric palette key '" + key + "'");
        }
        if (id < 0 || id > 255)
            raise("FormatError", "scene", sidecar_path + ": palette id out of range");
        palette[static_cast<std::uint8_t>(id)] = value.get<std::string>();
    }
    return palette;
}

std::string palette_json(const std::map<std::uint8_t, std::string>& palette) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [id, name] : palette) j[std::to_string(id)] = name;
    return j.dump(2) + "\n";
}

} // namespace

std::optional<std::uint8_t> SemanticLabelMap::class_id(const std::string& name) const {
    for (const auto& [id, n] : palette) {
        if (n == name) return id;
    }
    return std::nullopt;
}

std::size_t SemanticLabelMap::count(const std::string& name) const {
    const auto id = class_id(name);
    if (!id) return 0;
    return static_cast<std::size_t>(std::count(grid.begin(), grid.end(), *id));
}

std::uint8_t SemanticLabelMap::ensure_class(const std::string& name) {
    if (const auto id = class_id(name)) return *id;
    for (int candidate = 0; candidate < 255; ++candidate) {
        if (!palette.count(static_cast<std::uint8_t>(candidate))) {
            palette[static_cast<std::uint8_t>(candidate)] = name;
            return static_cast<std::uint8_t>(candidate);
        }
    }
    raise("PaletteFull", "scene", "no free class id for '" + name + "'");
}

std::size_t Mask::solid_pixels() const {
    return static_cast<std::size_t>(
        std::count_if(patch.begin(), patch.end(),
                      [](std::uint8_t id) { return id != kTransparentId; }));
}

const Mask* MaskGallery::first_for(const std::string& element) const {
    const auto it = entries.find(element);
    if (it == entries.end() || it->second.empty()) return nullptr;
    return &it->second.front();
}

SemanticLabelMap load_map(const std::string& path) {
    const PgmData pgm = parse_pgm(path);
    SemanticLabelMap map;
    map.width = pgm.width;
    map.height = pgm.height;
    map.grid = flip_rows(pgm.rows_top_down, pgm.width, pgm.height);
    map.palette = load_palette(path + ".json");
    std::set<std::uint8_t> seen(map.grid.begin(), map.grid.end());
    for (const std::uint8_t id : seen) {
        if (!map.palette.count(id))
            raise("PaletteMismatch", "scene",
                  path + ": class id " + std::to_string(id) + " missing from palette sidecar");
    }
    return map;
}

void save_map(const SemanticLabelMap& map, const std::string& path) {
    write_file_atomic(path, pgm_bytes(map.width, map.height,
                                      flip_rows(map.grid, map.width, map.height)));
    write_file_atomic(path + ".json", palette_json(map.palette));
}

Mask load_mask(const std::string& path) {
    const PgmData pgm = parse_pgm(path);
    Mask mask;
    mask.width = pgm.width;
    mask.height = pgm.height;
    mask.patch = flip_rows(pgm.rows_top_down, pgm.width, pgm.height);
    const std::string stem = fs::path(path).stem().string();
    const auto sep = stem.find("__");
    if (sep == std::string::npos)
        raise("FormatError", "scene", path + ": mask files are named <element>__<source>.pgm");
    mask.element = stem.substr(0, sep);
    mask.source_id = stem.substr(sep + 2);
    if (mask.solid_pixels() == 0)
        raise("FormatError", "scene", path + ": mask has no solid pixels");
    return mask;
}

void save_mask(const Mask& mask, const SemanticLabelMap& palette_source, const std::string& path) {
    write_file_atomic(path, pgm_bytes(mask.width, mask.height,
                                      flip_rows(mask.patch, mask.width, mask.height)));
    std::map<std::uint8_t, std::string> palette;
    for (const std::uint8_t id : mask.patch) {
        if (id == kTransparentId) continue;
        const auto it = palette_source.palette.find(id);
        if (it != palette_source.palette.end()) palette[id] = it->second;
    }
    write_file_atomic(path + ".json", palette_json(palette));
}

MaskGallery load_gallery(const std::string& dir) {
    MaskGallery gallery;
    if (!fs::is_directory(dir)) raise("IoError", "scene", "gallery directory missing: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".pgm") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
        Mask mask = load_mask(path);
        gallery.entries[mask.element].push_back(std::move(mask));
    }
    for (auto& [element, masks] : gallery.entries) {
        std::sort(masks.begin(), masks.end(),
                  [](const Mask& a, const Mask& b) { return a.source_id < b.source_id; });
    }
    return gallery;
}

MaskGallery build_gallery_from_maps(const std::vector<std::string>& map_paths,
                                    const std::vector<std::string>& element_names) {
    const std::set<std::string> wanted(element_names.begin(), element_names.end());
    MaskGallery gallery;
    for (const auto& path : map_paths) {
        const SemanticLabelMap map = load_map(path);
        const std::string stem = fs::path(path).stem().string();
        for (const auto& [id, name] : map.palette) {
            if (!wanted.count(name)) continue;
            auto mask = extract_mask(map, name);
            if (!mask) continue;
            mask->source_id = stem;
            gallery.entries[name].push_back(std::move(*mask));
        }
    }
    for (auto& [element, masks] : gallery.entries) {
        std::sort(masks.begin(), masks.end(),
                  [](const Mask& a, const Mask& b) { return a.source_id < b.source_id; });
    }
    return gallery;
}

std::optional<Mask> extract_mask(const SemanticLabelMap& map, const std::string& class_name) {
    const auto id = map.class_id(class_name);
    if (!id) raise("UnknownClass", "scene", "class '" + class_name + "' not in palette");

    std::vector<int> component(map.grid.size(), -1);
    struct Blob {
        std::size_t pixels = 0;
        int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    };
    std::vector<Blob> blobs;

    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * map.width + x;
            if (map.grid[idx] != *id || component[idx] >= 0) continue;
            const int label = static_cast<int>(blobs.size());
            Blob blob{0, x, y, x, y};
            stack.push_back({x, y});
            component[idx] = label;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++blob.pixels;
                blob.min_x = std::min(blob.min_x, cx);
                blob.min_y = std::min(blob.min_y, cy);
                blob.max_x = std::max(blob.max_x, cx);
                blob.max_y = std::max(blob.max_y, cy);
                const int neighbors[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
                for (const auto& n : neighbors) {
                    if (n[0] < 0 || n[0] >= map.width || n[1] < 0 || n[1] >= map.height) continue;
                    const std::size_t nidx = static_cast<std::size_t>(n[1]) * map.width + n[0];
                    if (map.grid[nidx] == *id && component[nidx] < 0) {
                        component[nidx] = label;
                        stack.push_back({n[0], n[1]});
                    }
                }
            }
            blobs.push_back(blob);
        }
    }
    if (blobs.empty()) return std::nullopt;

    // Largest blob; ties resolved toward the lowest-leftmost bounding box.
    int best = 0;
    for (int i = 1; i < static_cast<int>(blobs.size()); ++i) {
        const Blob& a = blobs[i];
        const Blob& b = blobs[best];
        if (a.pixels > b.pixels ||
            (a.pixels == b.pixels &&
             std::tie(a.min_y, a.min_x, a.max_y, a.max_x) <
                 std::tie(b.min_y, b.min_x, b.max_y, b.max_x))) {
            best = i;
        }
    }
    const Blob& blob = blobs[best];

    Mask mask;
    mask.element = class_name;
    mask.width = blob.max_x - blob.min_x + 1;
    mask.height = blob.max_y - blob.min_y + 1;
    mask.patch.assign(static_cast<std::size_t>(mask.width) * mask.height, kTransparentId);
    for (int y = blob.min_y; y <= blob.max_y; ++y) {
        for (int x = blob.min_x; x <= blob.max_x; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * map.width + x;
            if (component[idx] == best) {
                mask.patch[static_cast<std::size_t>(y - blob.min_y) * mask.width +
                           (x - blob.min_x)] = *id;
            }
        }
    }
    return mask;
}

std::optional<std::pair<int, int>> place_mask_add(const SemanticLabelMap& map, const Mask& mask,
                                                  const std::string& reference_class, bool closer,
                                                  double closer_offset_fraction) {
    const auto road = map.class_id("road");
    if (!road) return std::nullopt;
    if (map.count(reference_class) == 0) return std::nullopt;

    int base_row = -1;
    for (int y = map.height - 1; y >= 0; --y) {
        for (int x = 0; x + 1 < map.width; ++x) {
            if (map.at(x, y) == *road && map.at(x + 1, y) != *road) {
                base_row = y;
                break;
            }
        }
        if (base_row >= 0) break;
    }
    if (base_row < 0) return std::nullopt;

    if (closer) {
        base_row -= static_cast<int>(std::ceil(closer_offset_fraction * map.height));
        if (base_row < 0) return std::nullopt;
    }
    if (base_row + mask.height > map.height) return std::nullopt;

    for (int x = 1; x + mask.width <= map.width; ++x) {
        if (map.at(x - 1, base_row) == *road && map.at(x, base_row) != *road) {
            return std::make_pair(x, base_row);
        }
    }
    return std::nullopt;
}

SemanticLabelMap apply_add(const SemanticLabelMap& map, const Mask& mask, int x, int y) {
    if (x < 0 || y < 0 || x + mask.width > map.width || y + mask.height > map.height)
        raise("OutOfBounds", "scene", "mask placement outside the map");
    SemanticLabelMap out = map;
    for (int my = 0; my < mask.height; ++my) {
        for (int mx = 0; mx < mask.width; ++mx) {
            const std::uint8_t id = mask.patch[static_cast<std::size_t>(my) * mask.width + mx];
            if (id == kTransparentId) continue;
            out.set(x + mx, y + my, id);
            if (!out.palette.count(id)) out.palette[id] = mask.element;
        }
    }
    return out;
}

SemanticLabelMap apply_remove(const SemanticLabelMap& map, const std::string& target_class) {
    const auto target = map.class_id(target_class);
    if (!target) raise("UnknownClass", "scene", "class '" + target_class + "' not in palette");
    SemanticLabelMap out = map;
    const std::uint8_t road = out.ensure_class("road");
    for (auto& id : out.grid) {
        if (id == *target) id = road;
    }
    return out;
}

SemanticLabelMap apply_replace(const SemanticLabelMap& map, const std::string& target_class,
                               const std::string& new_class) {
    const auto target = map.class_id(target_class);
    if (!target) raise("UnknownClass", "scene", "class '" + target_class + "' not in palette");
    SemanticLabelMap out = map;
    const std::uint8_t replacement = out.ensure_class(new_class);
    for (auto& id : out.grid) {
        if (id == *target) id = replacement;
    }
    return out;
}

FilterResult filter_add(const SemanticLabelMap& map, const Rect& rect) {
    for (int y = rect.y; y < rect.y + rect.height; ++y) {
        for (int x = rect.x; x < rect.x + rect.width; ++x) {
            if (x < 0 || y < 0 || x >= map.width || y >= map.height) return {false, "occupied"};
            const auto it = map.palette.find(map.at(x, y));
            const std::string& name = it == map.palette.end() ? "" : it->second;
            if (name != "road" && name != "sidewalk" && name != "sky") return {false, "occupied"};
        }
    }
    return {true, ""};
}

FilterResult filter_region(const SemanticLabelMap& map, const std::string& class_name,
                           double min_region_fraction) {
    const double fraction =
        static_cast<double>(map.count(class_name)) / (static_cast<double>(map.width) * map.height);
    if (fraction < min_region_fraction) return {false, "too_small"};
    return {true, ""};
}

FilterResult filter_translation(const std::vector<std::uint8_t>& original_pixels,
                                const std::vector<std::uint8_t>& generated_pixels,
                                double mse_min) {
    if (original_pixels.size() != generated_pixels.size() || original_pixels.empty())
        return {true, ""};
    double sum = 0.0;
    for (std::size_t i = 0; i < original_pixels.size(); ++i) {
        const double d = static_cast<double>(original_pixels[i]) - generated_pixels[i];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(original_pixels.size());
    if (mse < mse_min) return {false, "already_in_domain"};
    return {true, ""};
}

} // namespace rmt::scene
