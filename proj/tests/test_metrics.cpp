#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/forward.hpp"
#include "core/iterate.hpp"
#include "core/metrics.hpp"
#include "core/objects.hpp"
#include "oracles.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace qpi;
using qpi_test::kPi;

TEST_CASE("wrap_angle maps into the half-open interval")
{
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(std::abs(wrap_angle(2.0 * kPi)) <= 1e-15);
    CHECK(wrap_angle(kPi + 0.1) == doctest::Approx(-kPi + 0.1).epsilon(1e-12));
    CHECK(wrap_angle(-3.5 * kPi) == doctest::Approx(0.5 * kPi).epsilon(1e-12));
    for (double a : {-9.7, -2.0, 0.4, 5.1, 14.2}) {
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        // Wrapping only ever moves by whole turns.
        CHECK(std::abs(std::remainder(w - a, 2.0 * kPi)) <= 1e-12);
    }
}

TEST_CASE("phase_rms basics")
{
    const RealMap a = qpi_test::random_map(8, 8, 3u, -1.0, 1.0);
    CHECK(phase_rms(a, a) == 0.0);
    CHECK(phase_rms(a, a, true) == 0.0);

    RealMap b = a;
    for (double& v : b.values())
        v += 0.3;
    CHECK(phase_rms(b, a) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(phase_rms(b, a, true) <= 1e-12);

    // Raw mode is symmetric and positive for distinct maps.
    const RealMap c = qpi_test::random_map(8, 8, 5u, -1.0, 1.0);
    CHECK(phase_rms(a, c) == doctest::Approx(phase_rms(c, a)).epsilon(1e-12));
    CHECK(phase_rms(a, c) > 0.0);

    RealMap d(8, 9, 0.0);
    CHECK_THROWS_AS(phase_rms(a, d), std::invalid_argument);
}

TEST_CASE("piston removal wraps before averaging")
{
    const RealMap truth = qpi_test::random_map(8, 8, 7u, -0.5, 0.5);
    RealMap shifted = truth;
    for (double& v : shifted.values())
        v += 2.0 * kPi + 0.3;
    CHECK(phase_rms(shifted, truth) == doctest::Approx(2.0 * kPi + 0.3).epsilon(1e-12));
    CHECK(phase_rms(shifted, truth, true) <= 1e-12);

    // A whole-turn offset on half the pixels disappears after wrapping.
    RealMap mixed = truth;
    for (size_t i = 0; i < mixed.size(); i += 2)
        mixed.values()[i] += 2.0 * kPi;
    CHECK(phase_rms(mixed, truth) > 1.0);
    CHECK(phase_rms(mixed, truth, true) <= 1e-12);
}

TEST_CASE("convergence fit recovers a geometric decay")
{
    std::vector<double> seq;
    for (int k = 0; k <= 20; ++k)
        seq.push_back(std::pow(0.778, k));
    const ConvergenceFit fit = estimate_convergence(seq);
    CHECK(fit.p == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.r == doctest::Approx(0.778).epsilon(1e-6));
}

TEST_CASE("convergence fit is independent of the starting error")
{
    std::vector<double> seq;
    for (int k = 0; k <= 15; ++k)
        seq.push_back(0.5 * std::pow(0.9, k));
    const ConvergenceFit fit = estimate_convergence(seq);
    CHECK(fit.p == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.r == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("convergence fit detects quadratic decay")
{
    // e_k = 0.5^(2^k) doubles the exponent each step; six entries sit above
    // the fit floor before the sequence collapses to it.
    std::vector<double> seq;
    for (int k = 0; k <= 8; ++k)
        seq.push_back(std::pow(0.5, std::pow(2.0, k)));
    const ConvergenceFit fit = estimate_convergence(seq);
    CHECK(fit.p == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("convergence fit rejects short or floored sequences naming the count")
{
    try {
        estimate_convergence({1.0, 0.5, 0.25});
        FAIL("expected a rejection for a short sequence");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("got 3") != std::string::npos);
    }

    // Entries at the floor do not qualify even if the sequence is long.
    std::vector<double> floored(10, 1e-14);
    floored[0] = 0.1;
    CHECK_THROWS_AS(estimate_convergence(floored), std::invalid_argument);

    // Enough entries overall, but the qualifying tail is interrupted too
    // early to produce two consecutive pairs.
    try {
        estimate_convergence({1.0, 0.9, 0.8, 0.7, 1e-14, 1e-14, 0.5, 0.4});
        FAIL("expected a rejection for too few qualifying pairs");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("got 1") != std::string::npos);
    }
}

TEST_CASE("background elimination with a neutral frame is the identity")
{
    const RealMap amp = qpi_test::random_map(8, 8, 11u, 0.2, 1.5);
    const RealMap phase = qpi_test::random_map(8, 8, 13u, -2.0, 2.0);
    const RealMap ones(8, 8, 1.0);
    const RealMap zeros(8, 8, 0.0);
    const BackgroundResult out = background_eliminate(amp, phase, ones, zeros);
    CHECK(qpi_test::max_abs_diff(out.amplitude, amp) <= 1e-12);
    CHECK(qpi_test::max_abs_diff(out.phase, phase) <= 1e-12);
    CHECK(out.flagged == 0);
}

TEST_CASE("background elimination is exact division and subtraction")
{
    const RealMap amp = qpi_test::random_map(8, 8, 17u, 0.2, 1.5);
    const RealMap phase = qpi_test::random_map(8, 8, 19u, -2.0, 2.0);
    const RealMap bg_amp = qpi_test::random_map(8, 8, 23u, 0.5, 2.0);

    // Matching phases cancel exactly.
    const BackgroundResult cancelled = background_eliminate(amp, phase, bg_amp, phase);
    for (double v : cancelled.phase.values())
        CHECK(std::abs(v) <= 1e-12);
    for (size_t i = 0; i < amp.size(); ++i)
        CHECK(cancelled.amplitude.values()[i] ==
              doctest::Approx(amp.values()[i] / bg_amp.values()[i]).epsilon(1e-12));

    // Differences wrap into (-pi, pi].
    const RealMap big(4, 4, 3.0);
    const RealMap small(4, 4, -3.0);
    const BackgroundResult wrapped =
        background_eliminate(RealMap(4, 4, 1.0), big, RealMap(4, 4, 1.0), small);
    for (double v : wrapped.phase.values())
        CHECK(v == doctest::Approx(6.0 - 2.0 * kPi).epsilon(1e-12));
}

TEST_CASE("background elimination flags and rejects dark frames")
{
    RealMap amp(4, 4, 1.0);
    RealMap phase(4, 4, 0.5);
    RealMap bg_amp(4, 4, 1.0);
    RealMap bg_phase(4, 4, 0.0);

    bg_amp.at(0, 0) = 0.0;
    bg_amp.at(1, 0) = 1e-9;
    const BackgroundResult out = background_eliminate(amp, phase, bg_amp, bg_phase);
    CHECK(out.flagged == 2);
    CHECK(out.amplitude.at(0, 0) == 0.0);
    CHECK(out.amplitude.at(1, 0) == 0.0);
    CHECK(out.amplitude.at(2, 0) == doctest::Approx(1.0));

    RealMap dark(4, 4, 0.0);
    for (int i = 0; i < 7; ++i)
        dark.values()[i] = 1.0; // 9 of 16 pixels dark: over half
    CHECK_THROWS_AS(background_eliminate(amp, phase, dark, bg_phase), std::invalid_argument);

    RealMap wrong(4, 5, 1.0);
    CHECK_THROWS_AS(background_eliminate(amp, phase, wrong, bg_phase), std::invalid_argument);
}

TEST_CASE("recovered tilt background is eliminated from a composite recovery")
{
    // Two-run calibration: recover the composite object and the background
    // frame separately, then divide/subtract. The corrected phase must stay
    // close to a recovery of the clean object alone.
    ObjectRecipe clean_recipe;
    clean_recipe.kind = ObjectKind::PurePhase;
    clean_recipe.size = 32;
    clean_recipe.phase_range = 1.0;
    clean_recipe.seed = 5;
    const ObjectSpec clean = generate(clean_recipe);

    ObjectRecipe tilt_recipe;
    tilt_recipe.kind = ObjectKind::TiltBackground;
    tilt_recipe.size = 32;
    tilt_recipe.phase_range = 0.5;
    const ObjectSpec tilt = generate(tilt_recipe);

    RealMap composite_phase = clean.phase;
    for (size_t i = 0; i < composite_phase.size(); ++i)
        composite_phase.values()[i] += tilt.phase.values()[i];

    const WindowSpec window{5, 5, 0, 0};
    const PhaseShiftTriple shifts{0.0, kPi / 2.0, kPi};
    const int pad = 6;
    IterationConfig cfg;
    cfg.max_iters = 30;
    cfg.self_residual_tol = 1e-12;

    auto recover = [&](const ObjectSpec& obj) {
        const auto triple = simulate_triple(obj, window, shifts, NoiseSpec{});
        return recover_from_triple(triple[0], triple[1], triple[2], shifts, window, pad,
                                   KMode::Combined, cfg);
    };

    const RecoveryResult base = recover(clean);
    const RecoveryResult composite =
        recover(ObjectSpec(clean.amplitude, composite_phase, pad));
    const RecoveryResult background = recover(tilt);

    const BackgroundResult corrected = background_eliminate(
        composite.amplitude, composite.phase, background.amplitude, background.phase);

    const double base_rms = phase_rms(base.phase, clean.phase, true);
    const double corrected_rms = phase_rms(corrected.phase, clean.phase, true);
    MESSAGE("baseline rms: ", base_rms, ", corrected rms: ", corrected_rms);
    CHECK(corrected_rms <= 2.0 * base_rms);
}

TEST_CASE("theoretical resolution")
{
    CHECK(theoretical_resolution(3e-3, 0.15, 532e-9) == doctest::Approx(2.66e-5).epsilon(1e-9));
    CHECK(theoretical_resolution(1.0, 1.0, 1.0) == doctest::Approx(1.0));
    const double d1 = theoretical_resolution(2e-3, 0.2, 600e-9);
    const double d2 = theoretical_resolution(4e-3, 0.2, 600e-9);
    CHECK(d1 == doctest::Approx(2.0 * d2).epsilon(1e-12));
    CHECK_THROWS_AS(theoretical_resolution(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(theoretical_resolution(1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(theoretical_resolution(1.0, 1.0, 0.0), std::invalid_argument);
}
