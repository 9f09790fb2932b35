// Reference model adapter: predicts driving behavior from label-map pixel
// statistics. Reads a file of map paths (one per line) and prints the
// predictions CSV expected by `rmt validate`:
//
//   speed    = 60 * (1 - min(1, 4 * pedestrian_pixel_fraction))  [km/h]
//   steering = 0                                                 [degrees]
//
// Useful as a stand-in driving model for smoke-testing a pipeline, and as a
// template for wiring a real model behind `model.command`.

#include <fstream>
#include <iostream>

#include "rmt/labelmap.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: rmt-pixel-model <file-list>\n";
        return 1;
    }
    std::ifstream list(argv[1]);
    if (!list) {
        std::cerr << "cannot read file list " << argv[1] << "\n";
        return 1;
    }

    std::cout << "image_id,behavior,value\n";
    std::string path;
    while (std::getline(list, path)) {
        if (path.empty()) continue;
        try {
            const auto map = rmt::scene::load_map(path);
            const double total = static_cast<double>(map.width) * map.height;
            const double fraction = static_cast<double>(map.count("pedestrian")) / total;
            const double speed = 60.0 * (1.0 - std::min(1.0, 4.0 * fraction));
            std::string stem = path;
            if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
                stem = stem.substr(slash + 1);
            if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
                stem = stem.substr(0, dot);
            std::cout << stem << ",speed," << speed << "\n";
            std::cout << stem << ",steering,0\n";
        } catch (const rmt::Error& e) {
            std::cerr << path << ": " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}
