#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "trd/image.hpp"

using namespace trd;

TEST_CASE("pad: zero mode puts zeros around a single pixel") {
    Image img(1, 1, 5.0);
    Image out = pad(img, 1, BoundaryMode::zero);
    REQUIRE(out.height == 3);
    REQUIRE(out.width == 3);
    CHECK(out.at(1, 1) == 5.0);
    double border = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r != 1 || c != 1) border += std::abs(out.at(r, c));
    CHECK(border == 0.0);
}

TEST_CASE("pad: symmetric duplicates the edge sample") {
    Image img(1, 2);
    img.at(0, 0) = 1.0;
    img.at(0, 1) = 2.0;
    Image out = pad(img, 1, BoundaryMode::symmetric);
    // middle row shows the half-sample reflection [1,1,2,2]
    CHECK(out.at(1, 0) == 1.0);
    CHECK(out.at(1, 1) == 1.0);
    CHECK(out.at(1, 2) == 2.0);
    CHECK(out.at(1, 3) == 2.0);
}

TEST_CASE("pad: margin 0 is the identity, oversized margin is rejected") {
    auto r = oracle::rng(7);
    Image img = oracle::random_image(4, 6, r);
    for (auto mode : {BoundaryMode::symmetric, BoundaryMode::zero, BoundaryMode::periodic}) {
        Image out = pad(img, 0, mode);
        CHECK(oracle::max_abs_diff(out, img) == 0.0);
    }
    CHECK_THROWS_AS(pad(img, 5, BoundaryMode::symmetric), DataError);
}

TEST_CASE("pad then center crop is the identity for all modes") {
    auto r = oracle::rng(8);
    Image img = oracle::random_image(5, 4, r);
    for (auto mode : {BoundaryMode::symmetric, BoundaryMode::zero, BoundaryMode::periodic}) {
        Image p = pad(img, 2, mode);
        double diff = 0.0;
        for (int i = 0; i < img.height; ++i)
            for (int j = 0; j < img.width; ++j)
                diff = std::max(diff, std::abs(p.at(i + 2, j + 2) - img.at(i, j)));
        CHECK(diff == 0.0);
    }
}

TEST_CASE("correlate_same: centered delta kernel is the identity") {
    auto r = oracle::rng(1);
    Image img = oracle::random_image(6, 7, r);
    Kernel delta(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0});
    for (auto mode : {BoundaryMode::symmetric, BoundaryMode::zero, BoundaryMode::periodic})
        CHECK(oracle::max_abs_diff(correlate_same(img, delta, mode), img) == 0.0);
}

TEST_CASE("correlate_same: zero-mean kernel annihilates constant images") {
    Image img(5, 5, 42.0);
    Kernel k(3, 3, {1, -2, 1, 0, 0, 0, -1, 1, 0});
    Image out = correlate_same(img, k, BoundaryMode::symmetric);
    for (double v : out.data) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("correlate_same matches an explicitly built dense matrix (zero mode)") {
    auto r = oracle::rng(42);
    Image img = oracle::random_image(4, 4, r);
    Kernel k(3, 3, oracle::random_vec(9, r));
    auto m = oracle::dense_operator(
        4, 4, [&](const Image& e) { return correlate_same(e, k, BoundaryMode::zero); });
    auto want = oracle::matvec(m, img.data);
    Image got = correlate_same(img, k, BoundaryMode::zero);
    for (size_t i = 0; i < want.size(); ++i) CHECK(got.data[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("rot180: difference kernel flips, symmetric kernel is fixed, involution") {
    Kernel kx(1, 2, {-1.0, 1.0});
    Kernel fx = rot180(kx);
    CHECK(fx.taps[0] == 1.0);
    CHECK(fx.taps[1] == -1.0);

    Kernel sym(3, 3, {1, 2, 1, 2, 5, 2, 1, 2, 1});
    Kernel fs = rot180(sym);
    for (size_t i = 0; i < sym.taps.size(); ++i) CHECK(fs.taps[i] == sym.taps[i]);

    auto r = oracle::rng(3);
    Kernel k(3, 3, oracle::random_vec(9, r));
    Kernel kk = rot180(rot180(k));
    for (size_t i = 0; i < k.taps.size(); ++i) CHECK(kk.taps[i] == k.taps[i]);
    CHECK(kk.anchor_r == k.anchor_r);
    CHECK(kk.anchor_c == k.anchor_c);
}

TEST_CASE("adjointness: <Ku,v> = <u, K^T v> exactly under zero mode") {
    auto r = oracle::rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        Image u = oracle::random_image(6, 5, r, -1.0, 1.0);
        Image v = oracle::random_image(6, 5, r, -1.0, 1.0);
        Kernel k = rep % 2 == 0 ? Kernel(3, 3, oracle::random_vec(9, r))
                                : Kernel(1, 2, {-1.0, 1.0}); // even-sized kernel too
        double left = oracle::dot(correlate_same(u, k, BoundaryMode::zero), v);
        double right = oracle::dot(u, correlate_same(v, rot180(k), BoundaryMode::zero));
        CHECK(left == doctest::Approx(right).epsilon(1e-10));
    }
}

TEST_CASE("correlate_adjoint is the exact transpose for every mode") {
    auto r = oracle::rng(1234);
    for (auto mode : {BoundaryMode::symmetric, BoundaryMode::zero, BoundaryMode::periodic}) {
        Kernel k(3, 3, oracle::random_vec(9, r));
        auto fwd = oracle::dense_operator(
            4, 4, [&](const Image& e) { return correlate_same(e, k, mode); });
        Image g = oracle::random_image(4, 4, r, -1.0, 1.0);
        auto want = oracle::matvec_t(fwd, g.data);
        Image got = correlate_adjoint(g, k, mode);
        for (size_t i = 0; i < want.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("psnr: cap, full-range constant, and sigma-25 analytic value") {
    Image a(4, 4, 10.0);
    CHECK(psnr(a, a) == 99.0);

    Image zero(2, 2, 0.0), full(2, 2, 255.0);
    CHECK(psnr(zero, full) == doctest::Approx(0.0).epsilon(1e-12));

    // Monte Carlo: sigma=25 noise on 10^6 pixels -> 20*log10(255/25) = 20.17
    auto r = oracle::rng(555);
    std::normal_distribution<double> n(0.0, 25.0);
    Image clean(1000, 1000, 128.0), noisy = clean;
    for (double& v : noisy.data) v += n(r);
    CHECK(psnr(clean, noisy) == doctest::Approx(20.0 * std::log10(255.0 / 25.0)).epsilon(0.0025));

    Image b(3, 2, 0.0);
    CHECK_THROWS_AS(psnr(a, b), DataError);
}

TEST_CASE("block_dct: constant 128 block maps to all-zero coefficients") {
    Image img(8, 8, 128.0);
    Image c = block_dct(img);
    for (double v : c.data) CHECK(std::abs(v) < 1e-12);
    Image back = block_idct(Image(8, 8, 0.0));
    for (double v : back.data) CHECK(v == doctest::Approx(128.0).epsilon(1e-12));
}

TEST_CASE("block_dct matches the naive double-loop oracle") {
    auto r = oracle::rng(77);
    Image img = oracle::random_image(8, 8, r);
    double in[8][8], want[8][8];
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) in[i][j] = img.at(i, j);
    oracle::naive_block_dct(in, want);
    Image got = block_dct(img);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(got.at(i, j) == doctest::Approx(want[i][j]).epsilon(1e-10));

    // and the inverse against its own oracle
    double winv[8][8];
    oracle::naive_block_idct(want, winv);
    Image inv = block_idct(got);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(inv.at(i, j) == doctest::Approx(winv[i][j]).epsilon(1e-10));
}

TEST_CASE("block_dct round trip and norm preservation on a multi-block image") {
    auto r = oracle::rng(1010);
    Image img = oracle::random_image(16, 24, r);
    Image back = block_idct(block_dct(img));
    CHECK(oracle::max_abs_diff(back, img) < 1e-10);

    double n_img = 0.0, n_coef = 0.0;
    Image c = block_dct(img);
    for (size_t i = 0; i < img.size(); ++i) {
        double d = img.data[i] - 128.0;
        n_img += d * d;
        n_coef += c.data[i] * c.data[i];
    }
    CHECK(std::sqrt(n_coef) == doctest::Approx(std::sqrt(n_img)).epsilon(1e-10));

    CHECK_THROWS_AS(block_dct(Image(9, 8)), DataError);
}
