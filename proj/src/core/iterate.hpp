#ifndef QPI_CORE_ITERATE_HPP
#define QPI_CORE_ITERATE_HPP

#include "algebraic.hpp"
#include "metrics.hpp"
#include "types.hpp"

#include <cstdint>
#include <utility>

namespace qpi {

struct IterationConfig {
    int max_iters = 25;
    double self_residual_tol = 1e-10; // RMS change of the phase between iterations
    bool record_trace = true;
};

/// Pixel counts of the defensive clamps applied along the recovery chain.
struct ClampCounts {
    std::int64_t r1_clamped = 0;
    std::int64_t discriminant_clamped = 0;
    std::int64_t indeterminate = 0;
    std::int64_t low_illumination = 0;
};

struct RecoveryResult {
    RealMap amplitude;
    RealMap phase;
    RealMap K_final;
    RealMap P_final;
    int iterations_run = 0;
    bool diverged = false;
    ConvergenceTrace trace;
    ClampCounts clamp_counts;
};

/// Reference wave of the current estimate: windowed low-pass of
/// Cbar*exp(i*E) on the pad_factor-times larger grid. K is the modulus,
/// P the argument in (-pi, pi].
std::pair<RealMap, RealMap> update_reference(const RealMap& cbar, const RealMap& e,
                                             const WindowSpec& window, int pad_factor);

/// Alternately re-derives the reference wave from the current phase estimate
/// and re-applies the vector-arctan recovery:
///   (K, P) <- update_reference(Cbar, E2, window)
///   E2     <- P + atan2(R3, R2 + K^2)
/// until max_iters, self-residual < tol, or five consecutive residual
/// increases (flagged as diverged). The amplitude is held fixed. Per
/// iteration the trace records the self-residual and, when ground truth is
/// given, the RMS error (entry 0 being the initial guess).
RecoveryResult refine(const RDecomposition& r, const WindowSpec& window, int pad_factor,
                      const RealMap& cbar, const RealMap& e_init,
                      const KApproximation& k_init, const IterationConfig& cfg,
                      const RealMap* ground_truth = nullptr);

/// Full recovery from a measured triple: linear decomposition, reference
/// approximation, algebraic phase, then iterative refinement. The
/// illumination map defaults to 1 everywhere.
RecoveryResult recover_from_triple(const RealMap& i1, const RealMap& i2, const RealMap& i3,
                                   const PhaseShiftTriple& shifts, const WindowSpec& window,
                                   int pad_factor, KMode kmode, const IterationConfig& cfg,
                                   const RealMap* illumination = nullptr,
                                   const RealMap* ground_truth = nullptr);

} // namespace qpi

#endif
