#include <doctest.h>

#include <cmath>
#include <numbers>

#include "usres/theorem1.hpp"
#include "usres/spectral.hpp"
#include "usres/rng.hpp"
#include "test_support.hpp"

using namespace usres;
using namespace usres::testing;
using std::numbers::pi;

TEST_CASE("max sampling step formula") {
    Theorem1Params p;
    p.spike_count = 2;
    p.kernel_order = 2;
    p.diff_order = 1;
    p.gamma = 1.0;
    p.lambda = 1.0;
    p.zeta = 1.0;
    p.tv_norm = 1.0;
    p.kernel_sup = 1.0;
    p.window = 10.0;

    // Shrinkage term (1/pi) K_2 / K_1 = 0.25 beats the rate term 10/6.
    CHECK(max_sampling_step(p) == doctest::Approx(0.25).epsilon(1e-12));

    p.lambda = 2.0;
    CHECK(max_sampling_step(p) == doctest::Approx(0.5).epsilon(1e-12));

    // With a huge lambda the rate term starts binding.
    p.lambda = 1e9;
    CHECK(max_sampling_step(p) == doctest::Approx(10.0 / 6.0).epsilon(1e-12));

    p.diff_order = 3;
    CHECK_THROWS_AS(max_sampling_step(p), std::invalid_argument);
}

TEST_CASE("difference-domain sup bound holds empirically") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CounterRng pick(CounterRng::derive_key({21, seed}));
        const int order = 2 + static_cast<int>(pick.uniform(0.0, 1.999));
        const int spikes = 1 + static_cast<int>(pick.uniform(0.0, 2.999));
        const double frac = pick.uniform(0.3, 0.9);
        const ExactInstance inst = make_exact_instance(seed, order, spikes, 500, frac);

        const int h = inst.params.diff_order;
        const double bound = favard_constant(order - h) / favard_constant(order) *
                             std::pow(pi * inst.step / inst.params.gamma, h) *
                             inst.params.tv_norm * inst.params.kernel_sup;
        const std::vector<double> dg = finite_difference(inst.g.values, h);
        CHECK(max_abs(dg) <= bound * (1.0 + 1e-12));
        CHECK(bound <= inst.params.lambda);  // sampling condition honored
    }
}

TEST_CASE("nonlinear filtering identity under the sampling bound") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CounterRng pick(CounterRng::derive_key({22, seed}));
        const int order = 2 + static_cast<int>(pick.uniform(0.0, 1.999));
        const int spikes = 1 + static_cast<int>(pick.uniform(0.0, 2.999));
        const double frac = pick.uniform(0.25, 0.95);
        const ExactInstance inst = make_exact_instance(seed + 1000, order, spikes, 400, frac);

        const std::vector<double> lhs =
            unfold_by_differences(inst.y, inst.params.diff_order, inst.params.lambda);
        const std::vector<double> rhs = finite_difference(inst.g.values, inst.params.diff_order);
        REQUIRE(lhs.size() == rhs.size());
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-9);
        }
    }
}

TEST_CASE("unfolding is the plain difference when nothing folds") {
    const ExactInstance inst = make_exact_instance(3, 2, 2, 300, 0.5);
    // The folded signal itself, treated as if unfolded: feeding the
    // in-range sequence reproduces its plain differences.
    FoldedSignal unfolded = inst.y;
    unfolded.values = inst.y.values;  // already in [-lambda, lambda)
    const std::vector<double> a = unfold_by_differences(unfolded, 2, 1e9);
    const std::vector<double> b = finite_difference(unfolded.values, 2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("unfolding ignores 2-lambda offsets on a suffix") {
    const ExactInstance inst = make_exact_instance(4, 2, 2, 300, 0.5);
    const double lambda = inst.params.lambda;
    FoldedSignal shifted = inst.y;
    for (std::size_t i = shifted.values.size() / 3; i < shifted.values.size(); ++i) {
        shifted.values[i] += 2.0 * lambda;
    }
    const std::vector<double> a = unfold_by_differences(inst.y, inst.params.diff_order, lambda);
    const std::vector<double> b = unfold_by_differences(shifted, inst.params.diff_order, lambda);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("exact recovery of a single on-grid spike") {
    KernelModel kernel{{1.0}, 1.0, 2};
    Theorem1Params p;
    p.spike_count = 1;
    p.kernel_order = 2;
    p.diff_order = 2;
    p.gamma = 1.0;
    p.zeta = 1.0;
    p.kernel_sup = kernel_sup_norm(kernel);
    p.window = 40.0;

    SpikeTrain truth{{1.5}, {0.0}};
    p.tv_norm = truth.tv_norm();
    p.lambda = 0.02;  // forces a dense grid and many folds

    const double step_bound = max_sampling_step(p);
    const double step = p.window / std::ceil(p.window / (0.5 * step_bound));
    const int count = static_cast<int>(std::round(p.window / step));
    truth.delays[0] = 128 * step;  // on-grid, clear of the window edges

    const SampledSignal g = synthesize(truth, kernel, step, count);
    AcquisitionConfig acq;
    acq.lambda = p.lambda;
    const FoldedSignal y = acquire(g.values, step, acq);

    const SpikeTrain rec = recover_exact(y, kernel, p);
    REQUIRE(rec.count() == 1);
    CHECK(std::abs(rec.delays[0] - truth.delays[0]) <= 1e-10 * p.window);
    CHECK(rec.amplitudes[0] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("exact recovery of an off-grid pair at twenty lambda dynamic range") {
    KernelModel kernel{{1.0}, 1.0, 2};
    const double window = 200.0;

    SpikeTrain truth{{1.0, 0.8}, {60.3137, 92.0071}};
    SampledSignal probe = synthesize(truth, kernel, 0.05, static_cast<int>(window / 0.05));
    const double peak = max_abs(probe.values);

    Theorem1Params p;
    p.spike_count = 2;
    p.kernel_order = 2;
    p.diff_order = 2;
    p.gamma = 1.0;
    p.zeta = 1.0;
    p.tv_norm = truth.tv_norm();
    p.kernel_sup = kernel_sup_norm(kernel);
    p.window = window;
    p.lambda = peak / 20.0;  // ||g||_inf = 20 lambda

    const double step = 0.5 * max_sampling_step(p);
    const int count = static_cast<int>(std::ceil(window / step));
    const SampledSignal g = synthesize(truth, kernel, step, count);
    AcquisitionConfig acq;
    acq.lambda = p.lambda;
    const FoldedSignal y = acquire(g.values, step, acq);

    const SpikeTrain rec = recover_exact(y, kernel, p);
    REQUIRE(rec.count() == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(rec.delays[k] - truth.delays[k]) <= 1e-6 * window);
        CHECK(std::abs(rec.amplitudes[k] - truth.amplitudes[k]) <=
              1e-6 * std::abs(truth.amplitudes[k]));
    }
}

TEST_CASE("violating the sampling bound corrupts the unfolding") {
    // Same construction as the exact instances but sampled 4x too coarse:
    // the nonlinear filtering identity must break somewhere.
    const ExactInstance inst = make_exact_instance(11, 2, 2, 400, 4.0);
    const std::vector<double> lhs =
        unfold_by_differences(inst.y, inst.params.diff_order, inst.params.lambda);
    const std::vector<double> rhs = finite_difference(inst.g.values, inst.params.diff_order);
    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
    }
    CHECK(worst > inst.params.lambda / 2.0);
}

TEST_CASE("random exact-recovery instances over L in {2,3}") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        CounterRng pick(CounterRng::derive_key({23, seed}));
        const int order = 2 + static_cast<int>(pick.uniform(0.0, 1.999));
        const int spikes = 1 + static_cast<int>(pick.uniform(0.0, 2.999));
        const int target_n = order == 2 ? 9000 : 4000;
        const ExactInstance inst = make_exact_instance(seed + 500, order, spikes, target_n, 0.5);

        const SpikeTrain rec = recover_exact(inst.y, inst.kernel, inst.params);
        REQUIRE(rec.count() == spikes);
        for (int k = 0; k < spikes; ++k) {
            CHECK(std::abs(rec.delays[k] - inst.spikes.delays[k]) <= 1e-6 * inst.params.window);
            CHECK(std::abs(rec.amplitudes[k] - inst.spikes.amplitudes[k]) <=
                  1e-6 * std::abs(inst.spikes.amplitudes[k]));
        }
    }
}
