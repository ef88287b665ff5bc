#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Plain (P2) PGM images, scaled to [0, 1] in memory.

namespace mos {

struct pgm_error : std::runtime_error {
    explicit pgm_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major, top row first, values in [0, 1]

    double& at(int i, int j) { return pixels[static_cast<std::size_t>(j) * width + i]; }
    double at(int i, int j) const { return pixels[static_cast<std::size_t>(j) * width + i]; }
};

inline PgmImage read_pgm(std::istream& is) {
    auto next_token = [&is]() -> std::string {
        std::string tok;
        for (;;) {
            if (!(is >> tok)) throw pgm_error("pgm: unexpected end of file");
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return tok;
        }
    };
    auto next_int = [&](const char* what) {
        const std::string tok = next_token();
        try {
            std::size_t used = 0;
            const int v = std::stoi(tok, &used);
            if (used == tok.size()) return v;
        } catch (const std::exception&) {
        }
        throw pgm_error(std::string("pgm: bad ") + what + " '" + tok + "'");
    };

    const std::string magic = next_token();
    if (magic != "P2") throw pgm_error("pgm: expected plain P2 magic, got '" + magic + "'");
    PgmImage img;
    img.width = next_int("width");
    img.height = next_int("height");
    const int maxval = next_int("maxval");
    if (img.width <= 0 || img.height <= 0 || maxval <= 0)
        throw pgm_error("pgm: nonpositive dimensions or maxval");
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (double& p : img.pixels) {
        const int v = next_int("pixel");
        if (v < 0 || v > maxval) throw pgm_error("pgm: pixel outside [0, maxval]");
        p = static_cast<double>(v) / maxval;
    }
    return img;
}

inline PgmImage read_pgm_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw pgm_error("pgm: cannot open '" + path + "'");
    return read_pgm(f);
}

inline std::string write_pgm(const PgmImage& img, int maxval = 255) {
    std::ostringstream os;
    os << "P2\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    int col = 0;
    for (std::size_t k = 0; k < img.pixels.size(); ++k) {
        const double clamped = std::min(1.0, std::max(0.0, img.pixels[k]));
        os << static_cast<int>(std::lround(clamped * maxval));
        if (++col == 16 || k + 1 == img.pixels.size()) {
            os << "\n";
            col = 0;
        } else {
            os << " ";
        }
    }
    return os.str();
}

}  // namespace mos
