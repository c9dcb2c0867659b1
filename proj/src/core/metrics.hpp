#ifndef QPI_CORE_METRICS_HPP
#define QPI_CORE_METRICS_HPP

#include "types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace qpi {

/// Per-iteration record of a refinement run. rms is indexed by iteration,
/// entry 0 being the algebraic recovery; it is empty when no ground truth was
/// supplied. Because the measured intensities are invariant under a global
/// phase offset, recovery is only defined up to a piston; rms is therefore
/// the piston-removed (gauge-fixed) error, with the unadjusted difference
/// kept in rms_raw as a diagnostic. self_residual[k] is the RMS change
/// produced by iteration k+1.
struct ConvergenceTrace {
    std::vector<double> rms;
    std::vector<double> rms_raw;
    std::vector<double> self_residual;
    double fitted_p = std::numeric_limits<double>::quiet_NaN();
    double fitted_r = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceFit {
    double p = 0.0;
    double r = 0.0;
};

struct BackgroundResult {
    RealMap amplitude;
    RealMap phase;
    std::int64_t flagged = 0; // pixels with background amplitude at or below threshold
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Root-mean-squared phase error sqrt(sum (a-b)^2 / N). With remove_piston
/// the differences are wrapped to (-pi, pi] and their mean is subtracted
/// before the RMS.
double phase_rms(const RealMap& recovered, const RealMap& truth, bool remove_piston = false);

/// RMS of a difference map, used for self-residual tracking.
double rms_diff(const RealMap& a, const RealMap& b);

/// Least-squares fit of log e[k+1] = p*log e[k] + log r over the tail of the
/// sequence, skipping the first two iterations and any entries at or below
/// the 1e-13 floor. Requires at least six above-floor entries overall.
ConvergenceFit estimate_convergence(const std::vector<double>& rms_sequence);

/// Removes a recovered calibration frame: amplitude ratio and wrapped phase
/// difference. Rejects when more than half the background pixels sit at or
/// below the amplitude threshold.
BackgroundResult background_eliminate(const RealMap& obj_amplitude, const RealMap& obj_phase,
                                      const RealMap& bg_amplitude, const RealMap& bg_phase,
                                      double amplitude_floor = 1e-6);

/// Diffraction-limited spot size d = lambda * f / D.
double theoretical_resolution(double beam_diameter, double focal_length, double wavelength);

} // namespace qpi

#endif
