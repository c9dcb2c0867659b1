#include "iterate.hpp"

#include "field.hpp"
#include "forward.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qpi {

namespace {

constexpr double kPi = 3.14159265358979323846;

// atan2 with the -pi branch folded onto +pi so results lie in (-pi, pi].
double vector_arctan(double y, double x)
{
    double a = std::atan2(y, x);
    if (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

// One pass of E = P + atan2(R3, R2 + K^2); pixels with both arctan
// arguments zero keep E = P and are counted.
RealMap arctan_pass(const RDecomposition& r, const RealMap& k, const RealMap& p,
                    std::int64_t& indeterminate)
{
    RealMap out(k.width(), k.height());
    for (size_t i = 0; i < out.size(); ++i) {
        const double kv = k.values()[i];
        const double denom = r.R2.values()[i] + kv * kv;
        const double numer = r.R3.values()[i];
        if (numer == 0.0 && denom == 0.0) {
            out.values()[i] = p.values()[i];
            ++indeterminate;
        } else {
            out.values()[i] = p.values()[i] + vector_arctan(numer, denom);
        }
    }
    return out;
}

void check_finite(const RealMap& m, int iteration)
{
    for (double v : m.values()) {
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "refine: non-finite phase value at iteration " << iteration;
            throw std::runtime_error(msg.str());
        }
    }
}

} // namespace

std::pair<RealMap, RealMap> update_reference(const RealMap& cbar, const RealMap& e,
                                             const WindowSpec& window, int pad_factor)
{
    if (!cbar.same_shape(e))
        throw std::invalid_argument("update_reference: maps must share dimensions");
    const ComplexField ref = windowed_lowpass(from_amp_phase(cbar, e), window, pad_factor);
    RealMap k(ref.width(), ref.height());
    RealMap p(ref.width(), ref.height());
    for (size_t i = 0; i < ref.size(); ++i) {
        k.values()[i] = std::abs(ref.values()[i]);
        double a = std::arg(ref.values()[i]);
        if (a <= -kPi)
            a += 2.0 * kPi;
        p.values()[i] = a;
    }
    return {std::move(k), std::move(p)};
}

RecoveryResult refine(const RDecomposition& r, const WindowSpec& window, int pad_factor,
                      const RealMap& cbar, const RealMap& e_init,
                      const KApproximation& k_init, const IterationConfig& cfg,
                      const RealMap* ground_truth)
{
    if (!cbar.same_shape(e_init) || !cbar.same_shape(r.R2))
        throw std::invalid_argument("refine: input shape mismatch");
    if (cfg.max_iters < 1)
        throw std::invalid_argument("refine: max_iters must be >= 1");
    if (cfg.self_residual_tol < 0.0)
        throw std::invalid_argument("refine: self_residual_tol must be >= 0");
    if (ground_truth != nullptr && !ground_truth->same_shape(e_init))
        throw std::invalid_argument("refine: ground truth shape mismatch");

    RecoveryResult result;
    result.amplitude = cbar;
    result.phase = e_init;
    result.K_final = k_init.K;
    result.P_final = k_init.P;

    auto record_rms = [&](const RealMap& estimate) {
        if (!cfg.record_trace || ground_truth == nullptr)
            return;
        result.trace.rms.push_back(phase_rms(estimate, *ground_truth, true));
        result.trace.rms_raw.push_back(phase_rms(estimate, *ground_truth, false));
    };
    record_rms(result.phase);

    double prev_residual = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        auto [k, p] = update_reference(cbar, result.phase, window, pad_factor);
        RealMap next = arctan_pass(r, k, p, result.clamp_counts.indeterminate);
        check_finite(next, iter);

        const double residual = rms_diff(next, result.phase);
        result.phase = std::move(next);
        result.K_final = std::move(k);
        result.P_final = std::move(p);
        result.iterations_run = iter;
        if (cfg.record_trace)
            result.trace.self_residual.push_back(residual);
        record_rms(result.phase);

        if (residual < cfg.self_residual_tol)
            break;
        if (residual > prev_residual) {
            if (++growth_streak >= 5) {
                result.diverged = true;
                break;
            }
        } else {
            growth_streak = 0;
        }
        prev_residual = residual;
    }

    if (cfg.record_trace && !result.trace.rms.empty()) {
        try {
            const ConvergenceFit fit = estimate_convergence(result.trace.rms);
            result.trace.fitted_p = fit.p;
            result.trace.fitted_r = fit.r;
        } catch (const std::exception&) {
            // trace too short or already at the floor; leave the fit as NaN
        }
    }
    return result;
}

RecoveryResult recover_from_triple(const RealMap& i1, const RealMap& i2, const RealMap& i3,
                                   const PhaseShiftTriple& shifts, const WindowSpec& window,
                                   int pad_factor, KMode kmode, const IterationConfig& cfg,
                                   const RealMap* illumination,
                                   const RealMap* ground_truth)
{
    const RDecomposition r = decompose_R(i1, i2, i3, shifts);
    const RealMap ones(i1.width(), i1.height(), 1.0);
    const RealMap& b = illumination != nullptr ? *illumination : ones;

    AmplitudeRecovery amp = recover_amplitude(r.R1, b);
    const int grid_w = i1.width() * pad_factor;
    const int grid_h = i1.height() * pad_factor;
    const KApproximation k0 =
        approximate_K(r, window, grid_w, grid_h, i1.width(), i1.height(), kmode);
    const PhaseRecovery alg = recover_phase_algebraic(r, k0.K, k0.P);

    // The loop holds the combined amplitude sqrt(R1) fixed; the returned
    // amplitude has the illumination divided out instead.
    RealMap cbar(i1.width(), i1.height());
    for (size_t i = 0; i < cbar.size(); ++i)
        cbar.values()[i] = std::sqrt(r.R1.values()[i]);

    RecoveryResult result =
        refine(r, window, pad_factor, cbar, alg.phase, k0, cfg, ground_truth);
    result.amplitude = std::move(amp.amplitude);
    result.clamp_counts.r1_clamped = r.r1_clamped + amp.r1_clamped;
    result.clamp_counts.indeterminate += alg.indeterminate;
    result.clamp_counts.low_illumination = amp.low_illumination;
    if (kmode == KMode::Combined)
        result.clamp_counts.discriminant_clamped = k_squared_candidates(r).discriminant_clamped;
    return result;
}

} // namespace qpi
