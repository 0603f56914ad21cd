#include "trd/jpegsim.hpp"

#include <algorithm>
#include <cmath>

namespace trd {

namespace {

// ITU-T T.81 Annex K, Table K.1 (luminance), row-major.
constexpr int kBaseTable[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
};

} // namespace

QuantTable quant_table(int quality) {
    if (quality < 1 || quality > 100) throw DataError("quant_table: quality must be in [1,100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    QuantTable tq;
    for (int i = 0; i < 64; ++i)
        tq[i] = std::clamp((kBaseTable[i] * scale + 50) / 100, 1, 255);
    return tq;
}

Image pad_to_block_multiple(const Image& img) {
    const int h = (img.height + 7) / 8 * 8;
    const int w = (img.width + 7) / 8 * 8;
    if (h == img.height && w == img.width) return img;
    Image out(h, w);
    for (int r = 0; r < h; ++r) {
        int sr = std::min(r, img.height - 1);
        for (int c = 0; c < w; ++c) out.at(r, c) = img.at(sr, std::min(c, img.width - 1));
    }
    return out;
}

Image crop(const Image& img, int height, int width) {
    if (height > img.height || width > img.width) throw DataError("crop: target exceeds image");
    if (height == img.height && width == img.width) return img;
    Image out(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) out.at(r, c) = img.at(r, c);
    return out;
}

DegradeResult jpeg_degrade(const Image& img, int quality) {
    const QuantTable tq = quant_table(quality);
    Image padded = pad_to_block_multiple(img);
    Image coeffs = block_dct(padded);

    DegradeResult res;
    res.box.lower = Image(padded.height, padded.width);
    res.box.upper = Image(padded.height, padded.width);
    for (int r = 0; r < padded.height; ++r) {
        for (int c = 0; c < padded.width; ++c) {
            double step = double(tq[(r % 8) * 8 + (c % 8)]);
            double d = std::round(coeffs.at(r, c) / step);
            coeffs.at(r, c) = d * step;
            res.box.lower.at(r, c) = (d - 0.5) * step;
            res.box.upper.at(r, c) = (d + 0.5) * step;
        }
    }
    res.decoded = crop(block_idct(coeffs), img.height, img.width);
    return res;
}

Image proj_q(const Image& coeffs, const QBox& box) {
    if (!box.valid_for(coeffs)) throw DataError("proj_q: shape mismatch");
    Image out(coeffs.height, coeffs.width);
    for (size_t i = 0; i < coeffs.size(); ++i)
        out.data[i] = std::clamp(coeffs.data[i], box.lower.data[i], box.upper.data[i]);
    return out;
}

} // namespace trd
