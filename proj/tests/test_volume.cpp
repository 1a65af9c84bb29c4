#include "dsreg/volume.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dsreg;

TEST_CASE("volume construction enforces invariants") {
    CHECK_THROWS_AS(Volume3({2, 2, 2}, {1, 1, 1}, std::vector<double>(7, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Volume3({2, 2, 2}, {0, 1, 1}), std::invalid_argument);
    std::vector<double> bad(8, 0.0);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(Volume3({2, 2, 2}, {1, 1, 1}, bad), std::invalid_argument);
    CHECK_THROWS_AS(DisplacementField({2, 2, 2}, {1, 1, 1}, std::vector<double>(8, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("trilinear sampling at lattice points returns the voxel value") {
    const Volume3 v = oracle::random_volume({4, 5, 6}, 1);
    for (int k = 0; k < 6; k += 2)
        for (int j = 0; j < 5; j += 2)
            for (int i = 0; i < 4; ++i)
                CHECK(sample_trilinear(v, {double(i), double(j), double(k)}) ==
                      doctest::Approx(v(i, j, k)).epsilon(1e-14));
}

TEST_CASE("trilinear midpoint of 0 and 1 is 0.5") {
    Volume3 v({2, 2, 2}, {1, 1, 1});
    v(1, 0, 0) = 1.0;
    v(1, 1, 0) = 1.0;
    v(1, 0, 1) = 1.0;
    v(1, 1, 1) = 1.0;
    CHECK(sample_trilinear(v, {0.5, 0.0, 0.0}) == doctest::Approx(0.5));
}

TEST_CASE("sampling far outside clamps to the corner voxel") {
    const Volume3 v = oracle::random_volume({3, 3, 3}, 2);
    CHECK(sample_trilinear(v, {-5, -5, -5}) == v(0, 0, 0));
    CHECK(sample_trilinear(v, {50, 50, 50}) == v(2, 2, 2));
}

TEST_CASE("trilinear is the exact convex combination along one axis") {
    const Volume3 v = oracle::random_volume({5, 4, 4}, 3);
    for (double f : {0.25, 0.5, 0.75}) {
        const double got = sample_trilinear(v, {1.0 + f, 2.0, 2.0});
        CHECK(got == doctest::Approx((1 - f) * v(1, 2, 2) + f * v(2, 2, 2)).epsilon(1e-14));
    }
}

TEST_CASE("trilinear matches the direct oracle at random points") {
    const Volume3 v = oracle::random_volume({6, 5, 7}, 4);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-2.0, 8.0);
    for (int t = 0; t < 200; ++t) {
        const Vec3 p{d(rng), d(rng), d(rng)};
        CHECK(sample_trilinear(v, p) == doctest::Approx(oracle::trilinear(v, p)).epsilon(1e-12));
    }
}

TEST_CASE("warp with the zero field is the identity, bit-exact") {
    const Volume3 v = oracle::random_volume({5, 6, 4}, 5);
    const DisplacementField zero(v.dims, v.spacing);
    const Volume3 w = warp(v, zero);
    CHECK(w.data == v.data);
}

TEST_CASE("warp with a unit integer shift matches direct index shift") {
    const Volume3 v = oracle::random_volume({8, 8, 8}, 6);
    DisplacementField f(v.dims, v.spacing);
    for (std::size_t n = 0; n < v.dims.voxels(); ++n) f.data[3 * n] = 1.0;
    const Volume3 w = warp(v, f);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 7; ++i) CHECK(w(i, j, k) == v(i + 1, j, k));
}

TEST_CASE("warp with a half-voxel shift averages axis neighbors") {
    const Volume3 v = oracle::random_volume({8, 8, 8}, 7);
    DisplacementField f(v.dims, v.spacing);
    for (std::size_t n = 0; n < v.dims.voxels(); ++n) f.data[3 * n] = 0.5;
    const Volume3 w = warp(v, f);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 7; ++i)
                CHECK(w(i, j, k) == doctest::Approx(0.5 * (v(i, j, k) + v(i + 1, j, k))));
}

TEST_CASE("warp with huge displacements stays in bounds and finite") {
    const Volume3 v = oracle::random_volume({5, 5, 5}, 8);
    DisplacementField f(v.dims, v.spacing);
    for (std::size_t n = 0; n < f.data.size(); ++n) f.data[n] = (n % 2 ? 1e6 : -1e6);
    const Volume3 w = warp(v, f);
    for (double x : w.data) CHECK(std::isfinite(x));
}

TEST_CASE("warp rejects dimension mismatch") {
    const Volume3 v = oracle::random_volume({4, 4, 4}, 9);
    const DisplacementField f({5, 4, 4}, {1, 1, 1});
    CHECK_THROWS_AS(warp(v, f), std::invalid_argument);
}

TEST_CASE("warp_multichannel equals per-channel warp") {
    const Volume3 a = oracle::random_volume({6, 6, 6}, 10);
    const Volume3 b = oracle::random_volume({6, 6, 6}, 11);
    DisplacementField f(a.dims, a.spacing);
    for (std::size_t n = 0; n < a.dims.voxels(); ++n) f.data[3 * n + 1] = 2.0;
    const auto out = warp_multichannel({a, b}, f);
    CHECK(out[0].data == warp(a, f).data);
    CHECK(out[1].data == warp(b, f).data);

    const DisplacementField zero(a.dims, a.spacing);
    const auto same = warp_multichannel({a, b}, zero);
    CHECK(same[0].data == a.data);
    CHECK(same[1].data == b.data);
}

TEST_CASE("resample with factor one is the identity") {
    const Volume3 v = oracle::random_volume({6, 6, 6}, 12);
    const Volume3 r = resample(v, {1.0, 1.0, 1.0});
    CHECK(r.data == v.data);
}

TEST_CASE("resample preserves constants") {
    Volume3 v({8, 8, 8}, {1, 1, 1}, 0.37);
    for (auto f : {0.5, 2.0, 0.75}) {
        const Volume3 r = resample(v, {f, f, f});
        for (double x : r.data) CHECK(x == doctest::Approx(0.37).epsilon(1e-12));
    }
}

TEST_CASE("resample rescales spacing to preserve physical extent") {
    Volume3 v({8, 8, 8}, {2, 2, 2});
    const Volume3 r = resample(v, {0.5, 0.5, 0.5});
    CHECK(r.dims.nx == 4);
    CHECK(r.spacing.sx == doctest::Approx(4.0));
    CHECK(r.dims.nx * r.spacing.sx == doctest::Approx(8 * 2.0));
}

TEST_CASE("resample rejects degenerate output dims") {
    Volume3 v({4, 4, 4}, {1, 1, 1});
    CHECK_THROWS_AS(resample(v, {0.25, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("downsample then upsample of a ramp stays close to the original") {
    // Composition oracle: the ramp is linear so blur + trilinear resampling
    // reproduce it away from borders; the frozen tolerance covers border
    // clamping effects.
    Volume3 v({8, 8, 8}, {1, 1, 1});
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) v(i, j, k) = i / 7.0;
    const Volume3 down = resample(v, {0.5, 0.5, 0.5});
    const Volume3 up = resample(down, {2.0, 2.0, 2.0});
    double max_err = 0.0;
    for (std::size_t n = 0; n < v.data.size(); ++n)
        max_err = std::max(max_err, std::abs(up.data[n] - v.data[n]));
    CHECK(max_err < 0.08);
}

TEST_CASE("upsample_field with equal dims is unchanged") {
    const DisplacementField f = oracle::random_field({4, 4, 4}, 13);
    const DisplacementField u = upsample_field(f, {4, 4, 4});
    CHECK(u.data == f.data);
}

TEST_CASE("upsample_field rescales constant displacements by the dim ratio") {
    DisplacementField f({4, 4, 4}, {1, 1, 1});
    for (std::size_t n = 0; n < f.dims.voxels(); ++n) f.data[3 * n] = 1.0;
    const DisplacementField u = upsample_field(f, {8, 8, 8});
    for (std::size_t n = 0; n < u.dims.voxels(); ++n) {
        CHECK(u.data[3 * n] == doctest::Approx(2.0));
        CHECK(u.data[3 * n + 1] == doctest::Approx(0.0));
    }
}

TEST_CASE("upsample_field matches the per-component trilinear oracle") {
    const DisplacementField f = oracle::random_field({4, 4, 4}, 14);
    const DisplacementField u = upsample_field(f, {8, 8, 8});
    Volume3 comp({4, 4, 4}, {1, 1, 1});
    for (int c = 0; c < 3; ++c) {
        for (std::size_t n = 0; n < comp.data.size(); ++n) comp.data[n] = f.data[3 * n + c];
        for (int k = 0; k < 8; ++k)
            for (int j = 0; j < 8; ++j)
                for (int i = 0; i < 8; ++i) {
                    const double expect =
                        2.0 * oracle::trilinear(comp, {i * 3.0 / 7.0, j * 3.0 / 7.0,
                                                       k * 3.0 / 7.0});
                    CHECK(u(i, j, k, c) == doctest::Approx(expect).epsilon(1e-12));
                }
    }
}

TEST_CASE("upsample_field of the zero field is zero at any target size") {
    const DisplacementField zero({3, 3, 3}, {1, 1, 1});
    for (Dims t : {Dims{5, 7, 9}, Dims{6, 6, 6}}) {
        const DisplacementField u = upsample_field(zero, t);
        for (double x : u.data) CHECK(x == 0.0);
    }
}

TEST_CASE("upsample_field rejects shrinking targets") {
    const DisplacementField f = oracle::random_field({4, 4, 4}, 15);
    CHECK_THROWS_AS(upsample_field(f, {3, 4, 4}), std::invalid_argument);
}
