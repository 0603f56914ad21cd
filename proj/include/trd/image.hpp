#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trd {

/// Thrown when an input file or in-memory structure is malformed.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when a computation produces non-finite values or cannot proceed numerically.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// 2D grayscale intensity field, row-major doubles.
/// Nominal range is [0,255] but values are not clamped while diffusing;
/// clamping happens only at 8-bit export.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, double fill = 0.0) : height(h), width(w), data(size_t(h) * w, fill) {
        if (h < 1 || w < 1) throw DataError("Image dimensions must be >= 1");
    }

    double& at(int r, int c) { return data[size_t(r) * width + c]; }
    double at(int r, int c) const { return data[size_t(r) * width + c]; }
    size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

/// Boundary handling for padding and filtering.
/// symmetric = half-sample reflection (edge pixel duplicated), the default
/// everywhere; zero and periodic exist for exact-adjoint property tests.
enum class BoundaryMode { symmetric, zero, periodic };

/// Small dense filter kernel. The anchor marks which tap sits on the output
/// pixel; it defaults to the center for odd sizes. rot180() mirrors the anchor
/// along with the taps so that correlating with the rotated kernel is the exact
/// transpose of correlating with the original under zero boundary, including
/// the 1x2 / 2x1 difference kernels.
struct Kernel {
    int rows = 1;
    int cols = 1;
    int anchor_r = 0;
    int anchor_c = 0;
    std::vector<double> taps;

    Kernel() = default;
    Kernel(int r, int c, std::vector<double> t)
        : rows(r), cols(c), anchor_r((r - 1) / 2), anchor_c((c - 1) / 2), taps(std::move(t)) {
        if (r < 1 || c < 1 || taps.size() != size_t(r) * c)
            throw DataError("Kernel taps length must equal rows*cols");
    }

    double& at(int r, int c) { return taps[size_t(r) * cols + c]; }
    double at(int r, int c) const { return taps[size_t(r) * cols + c]; }
};

/// Pad by `margin` pixels on every side. Rejects margin > min(h,w): repeated
/// reflection would be shape-dependent there and no caller needs it.
Image pad(const Image& img, int margin, BoundaryMode mode);

/// Cross-correlation with `k`, output the same size as the input; out-of-range
/// reads resolved per `mode`. This is the k*u of the diffusion steps.
Image correlate_same(const Image& img, const Kernel& k, BoundaryMode mode);

/// Exact transpose of the linear map `x -> correlate_same(x, k, mode)` applied
/// to `g`, for any boundary mode. Used by the training gradients, where the
/// adjoint must match the forward pass bit-for-bit in structure.
Image correlate_adjoint(const Image& g, const Kernel& k, BoundaryMode mode);

/// Taps reversed in both axes; anchor mirrored to keep the adjoint pairing.
Kernel rot180(const Kernel& k);

/// 20*log10(255/rmse) over all pixels, full frame, capped at 99 dB.
double psnr(const Image& a, const Image& b);

/// Per 8x8 block, orthonormal 2D DCT-II of (block - 128). Dimensions must be
/// multiples of 8.
Image block_dct(const Image& img);

/// Inverse of block_dct, including the +128 level unshift.
Image block_idct(const Image& coeffs);

/// Linear part of the block DCT (no level shift). Gradient propagation needs
/// D and D^T without the affine offset.
Image block_dct_raw(const Image& img);
Image block_idct_raw(const Image& coeffs);

} // namespace trd
