#include <doctest.h>

#include <cmath>
#include <limits>

#include "usres/forward_model.hpp"
#include "usres/rng.hpp"
#include "test_support.hpp"

using namespace usres;

TEST_CASE("synthesize basic cases") {
    KernelModel k{{1.0}, 1.0, 2};

    SUBCASE("empty train is all zero") {
        const SampledSignal g = synthesize(SpikeTrain{}, k, 0.1, 50);
        for (double v : g.values) CHECK(v == 0.0);
    }
    SUBCASE("single on-grid spike reproduces shifted kernel samples") {
        SpikeTrain s{{1.0}, {20 * 0.1}};
        const SampledSignal g = synthesize(s, k, 0.1, 50);
        for (int n = 0; n < 50; ++n) {
            CHECK(g.values[n] == doctest::Approx(kernel_eval(k, (n - 20) * 0.1)).epsilon(1e-14));
        }
    }
    SUBCASE("superposition") {
        SpikeTrain a{{1.3}, {1.8}};
        SpikeTrain b{{-0.4}, {3.1}};
        SpikeTrain both{{1.3, -0.4}, {1.8, 3.1}};
        const SampledSignal ga = synthesize(a, k, 0.05, 120);
        const SampledSignal gb = synthesize(b, k, 0.05, 120);
        const SampledSignal gc = synthesize(both, k, 0.05, 120);
        for (int n = 0; n < 120; ++n) {
            CHECK(gc.values[n] == doctest::Approx(ga.values[n] + gb.values[n]).epsilon(1e-12));
        }
    }
    SUBCASE("truncation is rejected") {
        SpikeTrain late{{1.0}, {4.9}};  // support sticks out of the 5.0 window
        CHECK_THROWS_AS(synthesize(late, k, 0.1, 50), std::invalid_argument);
        SpikeTrain early{{1.0}, {0.5}};  // support reaches below 0
        CHECK_THROWS_AS(synthesize(early, k, 0.1, 50), std::invalid_argument);
    }
}

TEST_CASE("synthesize linearity and shift covariance") {
    CounterRng rng(CounterRng::derive_key({11, 1}));
    KernelModel k{{0.8, 0.4}, 1.0, 2};
    SpikeTrain s{{1.1, -0.7}, {5.0, 9.3}};
    const double step = 0.25;
    const int count = 100;

    const SampledSignal g = synthesize(s, k, step, count);

    SUBCASE("amplitude scaling") {
        SpikeTrain scaled = s;
        const double alpha = rng.uniform(0.2, 3.0);
        for (double& a : scaled.amplitudes) a *= alpha;
        const SampledSignal gs = synthesize(scaled, k, step, count);
        for (int n = 0; n < count; ++n) {
            CHECK(gs.values[n] == doctest::Approx(alpha * g.values[n]).epsilon(1e-12));
        }
    }
    SUBCASE("delay shift by one step shifts samples by one index") {
        SpikeTrain shifted = s;
        for (double& d : shifted.delays) d += step;
        const SampledSignal gs = synthesize(shifted, k, step, count);
        for (int n = 1; n < count; ++n) {
            CHECK(gs.values[n] == doctest::Approx(g.values[n - 1]).epsilon(1e-10));
        }
    }
    SUBCASE("sup norm obeys the TV bound") {
        CHECK(usres::testing::max_abs(g.values) <= s.tv_norm() * kernel_sup_norm(k) + 1e-12);
    }
}

TEST_CASE("tof scene mapping") {
    SUBCASE("single target at 1.5 m") {
        const SpikeTrain s = make_tof_scene({{1.5}, {0.8}});
        CHECK(s.delays[0] == doctest::Approx(1.0006922855944561e-8).epsilon(1e-12));
        CHECK(s.amplitudes[0] == 0.8);
    }
    SUBCASE("three surfaces separated by 1.8 m and 2.0 m") {
        const SpikeTrain s = make_tof_scene({{2.0, 3.8, 5.8}, {1.0, 0.6, 0.9}});
        const double gap1 = s.delays[1] - s.delays[0];
        const double gap2 = s.delays[2] - s.delays[1];
        CHECK(gap1 == doctest::Approx(2.0 * 1.8 / kSpeedOfLight).epsilon(1e-12));
        CHECK(gap2 == doctest::Approx(2.0 * 2.0 / kSpeedOfLight).epsilon(1e-12));
        CHECK(gap1 == doctest::Approx(12.0083e-9).epsilon(1e-4));
        CHECK(gap2 == doctest::Approx(13.3426e-9).epsilon(1e-4));
    }
    SUBCASE("weak-strong amplitude ratio is preserved") {
        const SpikeTrain s = make_tof_scene({{1.0, 2.0}, {1.0, 0.1}});
        CHECK(s.amplitudes[0] / s.amplitudes[1] == doctest::Approx(10.0));
    }
    SUBCASE("invalid scenes") {
        CHECK_THROWS_AS(make_tof_scene({{1.0, 1.0}, {1.0, 1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(make_tof_scene({{-1.0}, {1.0}}), std::invalid_argument);
    }
}

TEST_CASE("fidelity") {
    SUBCASE("identical sequences") {
        const Fidelity f = fidelity({1.0, 2.0}, {1.0, 2.0});
        CHECK(f.mse == 0.0);
        CHECK(std::isinf(f.psnr_db));
    }
    SUBCASE("hand-computed case") {
        const Fidelity f = fidelity({1.0, 0.0}, {0.0, 0.0});
        CHECK(f.mse == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(f.psnr_db == doctest::Approx(3.0102999566398120).epsilon(1e-12));
    }
    SUBCASE("scaling both sequences leaves psnr unchanged") {
        const std::vector<double> a{0.4, -1.0, 2.0, 0.3};
        const std::vector<double> b{0.5, -1.2, 1.7, 0.2};
        std::vector<double> a2 = a, b2 = b;
        for (double& x : a2) x *= 3.7;
        for (double& x : b2) x *= 3.7;
        const Fidelity f1 = fidelity(a, b);
        const Fidelity f2 = fidelity(a2, b2);
        CHECK(f2.mse == doctest::Approx(3.7 * 3.7 * f1.mse).epsilon(1e-12));
        CHECK(f2.psnr_db == doctest::Approx(f1.psnr_db).epsilon(1e-12));
    }
    SUBCASE("length mismatch is rejected") {
        CHECK_THROWS_AS(fidelity({1.0}, {1.0, 2.0}), std::invalid_argument);
    }
}
