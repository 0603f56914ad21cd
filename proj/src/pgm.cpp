#include "trd/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace trd {

namespace {

// Next token after whitespace and '#' comments.
std::string next_token(std::istream& in, const std::string& path) {
    for (;;) {
        int c = in.peek();
        if (c == EOF) throw DataError("pgm: truncated header in '" + path + "'");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    std::string tok;
    in >> tok;
    return tok;
}

int parse_int(const std::string& tok, const std::string& what, const std::string& path) {
    size_t pos = 0;
    int v;
    try {
        v = std::stoi(tok, &pos);
    } catch (...) {
        throw DataError("pgm: bad " + what + " in '" + path + "'");
    }
    if (pos != tok.size()) throw DataError("pgm: bad " + what + " in '" + path + "'");
    return v;
}

} // namespace

Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("pgm: cannot open '" + path + "'");
    std::string magic = next_token(in, path);
    if (magic != "P5" && magic != "P2")
        throw DataError("pgm: '" + path + "' is not a P5/P2 PGM");
    int w = parse_int(next_token(in, path), "width", path);
    int h = parse_int(next_token(in, path), "height", path);
    int maxval = parse_int(next_token(in, path), "maxval", path);
    if (w < 1 || h < 1) throw DataError("pgm: bad dimensions in '" + path + "'");
    if (maxval != 255)
        throw DataError("pgm: '" + path + "' has maxval " + std::to_string(maxval) +
                        ", only 255 is supported");
    Image img(h, w);
    if (magic == "P5") {
        in.get(); // single whitespace after maxval
        std::vector<unsigned char> buf(img.size());
        in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
        if (size_t(in.gcount()) != buf.size())
            throw DataError("pgm: truncated pixel data in '" + path + "'");
        for (size_t i = 0; i < buf.size(); ++i) img.data[i] = double(buf[i]);
    } else {
        for (size_t i = 0; i < img.size(); ++i) {
            int v = parse_int(next_token(in, path), "pixel", path);
            if (v < 0 || v > 255) throw DataError("pgm: pixel out of range in '" + path + "'");
            img.data[i] = double(v);
        }
    }
    return img;
}

std::string pgm_to_bytes(const Image& img) {
    std::ostringstream out;
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    for (double v : img.data) {
        double r = std::round(v); // ties away from zero
        int b = int(r < 0.0 ? 0.0 : (r > 255.0 ? 255.0 : r));
        out.put(char(static_cast<unsigned char>(b)));
    }
    return out.str();
}

void save_pgm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("pgm: cannot open '" + path + "' for writing");
    std::string bytes = pgm_to_bytes(img);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw DataError("pgm: write failed for '" + path + "'");
}

} // namespace trd
