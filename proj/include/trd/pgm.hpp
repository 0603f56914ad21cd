#pragma once

#include <string>

#include "trd/image.hpp"

namespace trd {

/// Reads a P5 (binary) or P2 (ascii) PGM with maxval 255.
Image load_pgm(const std::string& path);

/// Writes a canonical P5: "P5\n<w> <h>\n255\n" + rows. Values are clamped to
/// [0,255] and rounded half away from zero.
void save_pgm(const Image& img, const std::string& path);

std::string pgm_to_bytes(const Image& img);

} // namespace trd
