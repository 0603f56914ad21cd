// Test-only reference implementations, kept independent of the library code
// paths they certify.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "trd/image.hpp"

namespace oracle {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline trd::Image random_image(int h, int w, std::mt19937_64& r, double lo = 0.0,
                               double hi = 255.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    trd::Image img(h, w);
    for (double& v : img.data) v = d(r);
    return img;
}

inline std::vector<double> random_vec(size_t n, std::mt19937_64& r, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = d(r);
    return v;
}

// Dense matrix of a linear image-to-image map, built column by column from
// unit images (brute force).
inline std::vector<std::vector<double>> dense_operator(
    int h, int w, const std::function<trd::Image(const trd::Image&)>& op) {
    const size_t n = size_t(h) * w;
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (size_t col = 0; col < n; ++col) {
        trd::Image e(h, w, 0.0);
        e.data[col] = 1.0;
        trd::Image out = op(e);
        for (size_t row = 0; row < n; ++row) m[row][col] = out.data[row];
    }
    return m;
}

inline std::vector<double> matvec(const std::vector<std::vector<double>>& m,
                                  const std::vector<double>& x) {
    std::vector<double> y(m.size(), 0.0);
    for (size_t r = 0; r < m.size(); ++r)
        for (size_t c = 0; c < x.size(); ++c) y[r] += m[r][c] * x[c];
    return y;
}

inline std::vector<double> matvec_t(const std::vector<std::vector<double>>& m,
                                    const std::vector<double>& x) {
    std::vector<double> y(m[0].size(), 0.0);
    for (size_t r = 0; r < m.size(); ++r)
        for (size_t c = 0; c < y.size(); ++c) y[c] += m[r][c] * x[r];
    return y;
}

// Naive O(64^2) 2-D DCT-II of one 8x8 block of (img - 128), by the textbook
// double sum.
inline void naive_block_dct(const double in[8][8], double out[8][8]) {
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            double au = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            double av = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            double acc = 0.0;
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y)
                    acc += (in[x][y] - 128.0) * std::cos((2 * x + 1) * u * M_PI / 16.0) *
                           std::cos((2 * y + 1) * v * M_PI / 16.0);
            out[u][v] = au * av * acc;
        }
    }
}

inline void naive_block_idct(const double in[8][8], double out[8][8]) {
    for (int x = 0; x < 8; ++x) {
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    double au = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
                    double av = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
                    acc += au * av * in[u][v] * std::cos((2 * x + 1) * u * M_PI / 16.0) *
                           std::cos((2 * y + 1) * v * M_PI / 16.0);
                }
            out[x][y] = acc + 128.0;
        }
    }
}

inline double dot(const trd::Image& a, const trd::Image& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

inline double max_abs_diff(const trd::Image& a, const trd::Image& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double rel_linf_diff(const trd::Image& a, const trd::Image& ref) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a.data[i] - ref.data[i]));
        den = std::max(den, std::abs(ref.data[i]));
    }
    return num / std::max(den, 1e-300);
}

} // namespace oracle
