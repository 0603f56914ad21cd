#pragma once

#include <array>

#include "trd/image.hpp"

namespace trd {

/// 8x8 luminance quantization steps, entries in [1,255].
using QuantTable = std::array<int, 64>;

/// Per-coefficient box [lower, upper] of DCT values consistent with the
/// observed quantized indices. Lives on the multiple-of-8 padded grid.
struct QBox {
    Image lower;
    Image upper;

    bool valid_for(const Image& coeffs) const { return lower.same_shape(coeffs); }
};

/// ITU-T T.81 Annex K luminance table scaled by the standard quality rule:
/// S = 5000/q (q < 50) or 200 - 2q, entry = clamp(floor((base*S + 50)/100), 1, 255).
QuantTable quant_table(int quality);

struct DegradeResult {
    Image decoded; // cropped back to the input size
    QBox box;      // on the padded grid
};

/// Quantize-and-decode round trip of the simulator: per 8x8 block,
/// d = round(dct/tq), decoded = idct(d*tq), box = [(d-0.5)*tq, (d+0.5)*tq].
/// Non-multiple-of-8 inputs are replicate-padded before the transform and
/// cropped after decoding; the box stays on the padded grid.
DegradeResult jpeg_degrade(const Image& img, int quality);

/// Elementwise clamp of coeffs into the box (orthogonal projection onto Q).
Image proj_q(const Image& coeffs, const QBox& box);

/// Replicate-pad to the next multiple of 8 in each dimension (identity when
/// already aligned).
Image pad_to_block_multiple(const Image& img);

Image crop(const Image& img, int height, int width);

} // namespace trd
