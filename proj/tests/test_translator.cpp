#include "dsreg/translator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace dsreg;

TEST_CASE("identity translator returns its input bit-exactly") {
    const Volume3 v = oracle::random_volume({6, 6, 6}, 71);
    CHECK(IdentityTranslator{}.apply(v).data == v.data);
}

TEST_CASE("gamma 1 with no table is the identity") {
    const Volume3 v = oracle::random_volume({6, 6, 6}, 72);
    const GammaRemapTranslator t(1.0);
    const Volume3 out = t.apply(v);
    for (std::size_t n = 0; n < v.data.size(); ++n)
        CHECK(out.data[n] == doctest::Approx(v.data[n]).epsilon(1e-14));
}

TEST_CASE("gamma 2 squares intensities pointwise") {
    Volume3 v({4, 4, 4}, {1, 1, 1}, 0.5);
    const GammaRemapTranslator t(2.0);
    for (double x : t.apply(v).data) CHECK(x == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("gamma translator matches a direct scalar loop") {
    const Volume3 v = oracle::random_volume({6, 6, 6}, 73);
    const GammaRemapTranslator t(1.7);
    const Volume3 out = t.apply(v);
    for (std::size_t n = 0; n < v.data.size(); ++n)
        CHECK(out.data[n] ==
              doctest::Approx(std::pow(v.data[n], 1.7)).epsilon(1e-13));
}

TEST_CASE("remap table interpolates linearly between breakpoints") {
    const GammaRemapTranslator t(1.0, {{0.0, 0.0}, {0.5, 0.8}, {1.0, 1.0}});
    CHECK(t.map_value(0.0) == doctest::Approx(0.0));
    CHECK(t.map_value(0.25) == doctest::Approx(0.4));
    CHECK(t.map_value(0.5) == doctest::Approx(0.8));
    CHECK(t.map_value(0.75) == doctest::Approx(0.9));
    CHECK(t.map_value(1.0) == doctest::Approx(1.0));
}

TEST_CASE("remap table preserves intensity ordering") {
    const GammaRemapTranslator t(2.0, {{0.0, 0.1}, {0.4, 0.1}, {1.0, 0.9}});
    double prev = -1.0;
    for (int s = 0; s <= 100; ++s) {
        const double y = t.map_value(s / 100.0);
        CHECK(y >= prev);
        prev = y;
    }
}

TEST_CASE("invalid gamma and invalid tables are rejected") {
    CHECK_THROWS_AS(GammaRemapTranslator(0.0), std::invalid_argument);
    CHECK_THROWS_AS(GammaRemapTranslator(-1.0), std::invalid_argument);
    // non-increasing x breakpoints
    CHECK_THROWS_AS(GammaRemapTranslator(1.0, {{0.0, 0.0}, {0.0, 1.0}}),
                    std::invalid_argument);
    // decreasing values break monotonicity
    CHECK_THROWS_AS(GammaRemapTranslator(1.0, {{0.0, 0.5}, {1.0, 0.2}}),
                    std::invalid_argument);
}

TEST_CASE("fixed-volume translator ignores the input values") {
    const Volume3 target = oracle::random_volume({5, 5, 5}, 74);
    const FixedVolumeTranslator t(target);
    const Volume3 in = oracle::random_volume({5, 5, 5}, 75);
    CHECK(t.apply(in).data == target.data);
    const Volume3 wrong = oracle::random_volume({4, 5, 5}, 76);
    CHECK_THROWS_AS(t.apply(wrong), std::invalid_argument);
}

TEST_CASE("artifact injector with no blobs equals the base translator") {
    const Volume3 v = oracle::random_volume({6, 6, 6}, 77);
    const ArtifactInjector inj(std::make_shared<IdentityTranslator>(), {});
    CHECK(inj.apply(v).data == v.data);
}

TEST_CASE("one zero-amplitude blob leaves the output unchanged") {
    const Volume3 v = oracle::random_volume({6, 6, 6}, 78);
    const ArtifactInjector inj(std::make_shared<IdentityTranslator>(),
                               {{{3, 3, 3}, 2.0, 0.0, 1}});
    CHECK(inj.apply(v).data == v.data);
}

TEST_CASE("one centered blob matches the pointwise Gaussian oracle") {
    Volume3 zero({9, 9, 9}, {1, 1, 1});
    const ArtifactInjector inj(std::make_shared<IdentityTranslator>(),
                               {{{4, 4, 4}, 2.0, 0.5, 1}});
    const Volume3 out = inj.apply(zero);
    CHECK(out(4, 4, 4) == doctest::Approx(0.5).epsilon(1e-12));
    const double sigma = 2.0 / 2.0;
    for (int k = 0; k < 9; ++k)
        for (int j = 0; j < 9; ++j)
            for (int i = 0; i < 9; ++i) {
                const double r2 = (i - 4.0) * (i - 4.0) + (j - 4.0) * (j - 4.0) +
                                  (k - 4.0) * (k - 4.0);
                const double expect = 0.5 * std::exp(-0.5 * r2 / (sigma * sigma));
                CHECK(out(i, j, k) == doctest::Approx(expect).epsilon(1e-12));
            }
}

TEST_CASE("negative-sign blob subtracts and output stays clipped to [0,1]") {
    Volume3 bright({7, 7, 7}, {1, 1, 1}, 0.1);
    const ArtifactInjector inj(std::make_shared<IdentityTranslator>(),
                               {{{3, 3, 3}, 1.5, 0.8, -1}});
    const Volume3 out = inj.apply(bright);
    CHECK(out(3, 3, 3) == 0.0); // 0.1 - 0.8 clipped
    for (double x : out.data) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("random blob placement is deterministic per seed and in bounds") {
    const Dims d{16, 16, 16};
    const auto base = std::make_shared<IdentityTranslator>();
    const auto a = ArtifactInjector::with_random_blobs(base, d, 4, 2.0, 0.3, 11);
    const auto b = ArtifactInjector::with_random_blobs(base, d, 4, 2.0, 0.3, 11);
    const auto c = ArtifactInjector::with_random_blobs(base, d, 4, 2.0, 0.3, 12);
    REQUIRE(a.blobs().size() == 4);
    for (std::size_t n = 0; n < 4; ++n) {
        CHECK(a.blobs()[n].center == b.blobs()[n].center);
        for (int ax = 0; ax < 3; ++ax) {
            CHECK(a.blobs()[n].center[ax] >= 0.0);
            CHECK(a.blobs()[n].center[ax] <= 15.0);
        }
    }
    bool any_differ = false;
    for (std::size_t n = 0; n < 4; ++n)
        if (a.blobs()[n].center != c.blobs()[n].center) any_differ = true;
    CHECK(any_differ);
}

TEST_CASE("blob centers outside the volume are rejected at apply time") {
    const Volume3 v = oracle::random_volume({5, 5, 5}, 79);
    const ArtifactInjector inj(std::make_shared<IdentityTranslator>(),
                               {{{10, 2, 2}, 1.0, 0.2, 1}});
    CHECK_THROWS_AS(inj.apply(v), std::invalid_argument);
}
