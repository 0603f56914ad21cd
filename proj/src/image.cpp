#include "trd/image.hpp"

#include <algorithm>
#include <cmath>

namespace trd {

namespace {

// Maps an out-of-range index into [0,n) per boundary mode; returns -1 for
// zero mode (no contribution).
inline int map_index(int i, int n, BoundaryMode mode) {
    if (i >= 0 && i < n) return i;
    switch (mode) {
        case BoundaryMode::zero:
            return -1;
        case BoundaryMode::periodic: {
            int m = i % n;
            return m < 0 ? m + n : m;
        }
        case BoundaryMode::symmetric:
            // half-sample reflection, repeated until in range
            while (i < 0 || i >= n) {
                if (i < 0) i = -i - 1;
                if (i >= n) i = 2 * n - 1 - i;
            }
            return i;
    }
    return -1;
}

constexpr int kBlock = 8;

// Orthonormal 1-D DCT-II matrix for the 8x8 blocks.
struct Dct8 {
    double c[kBlock][kBlock];
    Dct8() {
        for (int k = 0; k < kBlock; ++k) {
            double a = std::sqrt((k == 0 ? 1.0 : 2.0) / kBlock);
            for (int n = 0; n < kBlock; ++n)
                c[k][n] = a * std::cos(M_PI * k * (2 * n + 1) / (2.0 * kBlock));
        }
    }
};
const Dct8 kDct8;

void require_block_dims(const Image& img) {
    if (img.height % kBlock != 0 || img.width % kBlock != 0)
        throw DataError("block DCT requires dimensions divisible by 8");
}

// out = C * B * C^T per block (forward = true), or C^T * X * C (inverse),
// with an additive level shift applied before/after.
Image block_transform(const Image& img, bool forward, double pre_shift, double post_shift) {
    require_block_dims(img);
    Image out(img.height, img.width);
    double tmp[kBlock][kBlock];
    for (int br = 0; br < img.height; br += kBlock) {
        for (int bc = 0; bc < img.width; bc += kBlock) {
            for (int r = 0; r < kBlock; ++r)
                for (int c = 0; c < kBlock; ++c) {
                    double acc = 0.0;
                    for (int n = 0; n < kBlock; ++n) {
                        double m = forward ? kDct8.c[r][n] : kDct8.c[n][r];
                        acc += m * (img.at(br + n, bc + c) + pre_shift);
                    }
                    tmp[r][c] = acc;
                }
            for (int r = 0; r < kBlock; ++r)
                for (int c = 0; c < kBlock; ++c) {
                    double acc = 0.0;
                    for (int n = 0; n < kBlock; ++n) {
                        double m = forward ? kDct8.c[c][n] : kDct8.c[n][c];
                        acc += tmp[r][n] * m;
                    }
                    out.at(br + r, bc + c) = acc + post_shift;
                }
        }
    }
    return out;
}

} // namespace

Image pad(const Image& img, int margin, BoundaryMode mode) {
    if (margin < 0) throw DataError("pad: margin must be >= 0");
    if (margin > std::min(img.height, img.width))
        throw DataError("pad: margin larger than the image is not supported");
    Image out(img.height + 2 * margin, img.width + 2 * margin);
    for (int r = 0; r < out.height; ++r) {
        int sr = map_index(r - margin, img.height, mode);
        for (int c = 0; c < out.width; ++c) {
            int sc = map_index(c - margin, img.width, mode);
            out.at(r, c) = (sr < 0 || sc < 0) ? 0.0 : img.at(sr, sc);
        }
    }
    return out;
}

Image correlate_same(const Image& img, const Kernel& k, BoundaryMode mode) {
    Image out(img.height, img.width);
    const int h = img.height, w = img.width;
    // interior rows/cols that need no boundary mapping
    const int r0 = k.anchor_r, r1 = h - (k.rows - 1 - k.anchor_r);
    const int c0 = k.anchor_c, c1 = w - (k.cols - 1 - k.anchor_c);
    for (int r = 0; r < h; ++r) {
        bool inner_r = r >= r0 && r < r1;
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            if (inner_r && c >= c0 && c < c1) {
                const double* base = &img.data[size_t(r - k.anchor_r) * w + (c - k.anchor_c)];
                const double* tap = k.taps.data();
                for (int i = 0; i < k.rows; ++i, base += w)
                    for (int j = 0; j < k.cols; ++j) acc += *tap++ * base[j];
            } else {
                for (int i = 0; i < k.rows; ++i) {
                    int sr = map_index(r + i - k.anchor_r, h, mode);
                    if (sr < 0) continue;
                    for (int j = 0; j < k.cols; ++j) {
                        int sc = map_index(c + j - k.anchor_c, w, mode);
                        if (sc < 0) continue;
                        acc += k.at(i, j) * img.at(sr, sc);
                    }
                }
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

Image correlate_adjoint(const Image& g, const Kernel& k, BoundaryMode mode) {
    // scatter form: transpose of the gather in correlate_same
    Image out(g.height, g.width, 0.0);
    const int h = g.height, w = g.width;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double gv = g.at(r, c);
            if (gv == 0.0) continue;
            for (int i = 0; i < k.rows; ++i) {
                int sr = map_index(r + i - k.anchor_r, h, mode);
                if (sr < 0) continue;
                for (int j = 0; j < k.cols; ++j) {
                    int sc = map_index(c + j - k.anchor_c, w, mode);
                    if (sc < 0) continue;
                    out.at(sr, sc) += k.at(i, j) * gv;
                }
            }
        }
    }
    return out;
}

Kernel rot180(const Kernel& k) {
    Kernel out;
    out.rows = k.rows;
    out.cols = k.cols;
    out.anchor_r = k.rows - 1 - k.anchor_r;
    out.anchor_c = k.cols - 1 - k.anchor_c;
    out.taps.resize(k.taps.size());
    for (int r = 0; r < k.rows; ++r)
        for (int c = 0; c < k.cols; ++c)
            out.at(r, c) = k.at(k.rows - 1 - r, k.cols - 1 - c);
    return out;
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw DataError("psnr: dimension mismatch");
    double se = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a.data[i] - b.data[i];
        se += d * d;
    }
    double rmse = std::sqrt(se / double(a.size()));
    const double floor = 255.0 * std::pow(10.0, -99.0 / 20.0);
    if (rmse < floor) return 99.0;
    return 20.0 * std::log10(255.0 / rmse);
}

Image block_dct(const Image& img) { return block_transform(img, true, -128.0, 0.0); }
Image block_idct(const Image& coeffs) { return block_transform(coeffs, false, 0.0, 128.0); }
Image block_dct_raw(const Image& img) { return block_transform(img, true, 0.0, 0.0); }
Image block_idct_raw(const Image& coeffs) { return block_transform(coeffs, false, 0.0, 0.0); }

} // namespace trd
