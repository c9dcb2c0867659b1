#ifndef QPI_CORE_ALGEBRAIC_HPP
#define QPI_CORE_ALGEBRAIC_HPP

#include "types.hpp"

#include <array>
#include <cstdint>

namespace qpi {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Per-pixel unknowns of the three-shift linear system:
///   R1 = Cbar^2
///   R2 = Cbar*K*cos(E - P) - K^2
///   R3 = Cbar*K*sin(E - P)
struct RDecomposition {
    RealMap R1;
    RealMap R2;
    RealMap R3;
    std::int64_t r1_clamped = 0; // pixels where a slightly negative R1 was clamped to 0
};

enum class KMode { Combined, Zero };

/// Reference-wave estimate used to seed the phase recovery. P is identically
/// zero here; the iterative stage replaces both maps.
struct KApproximation {
    KMode mode = KMode::Combined;
    RealMap K;
    RealMap P;
};

/// The two roots of the quadratic satisfied by K^2 at each pixel.
struct KSquaredCandidates {
    RealMap plus;
    RealMap minus;
    std::int64_t discriminant_clamped = 0;
};

struct PhaseRecovery {
    RealMap phase;
    std::int64_t indeterminate = 0; // pixels where both arctan arguments vanished
};

struct AmplitudeRecovery {
    RealMap amplitude;
    std::int64_t r1_clamped = 0;
    std::int64_t low_illumination = 0;
};

/// Row k of the modulation matrix is [1, 2cos(t_k) - 2, 2sin(t_k)].
Mat3 build_modulation_matrix(const PhaseShiftTriple& shifts);

double det3(const Mat3& m);

/// Adjugate-based inverse. Throws when |det| falls below the conditioning
/// threshold used for shift validation.
Mat3 invert3(const Mat3& m, double min_abs_det = 1e-6);

/// Solves [R1 R2 R3] = T^-1 [I1 I2 I3] per pixel. Rejects near-singular
/// shift triples, naming the offending values.
RDecomposition decompose_R(const RealMap& i1, const RealMap& i2, const RealMap& i3,
                           const PhaseShiftTriple& shifts);

/// Roots of x^2 - (R1 - 2*R2)x + (R2^2 + R3^2) = 0, the candidates for K^2.
/// Slightly negative discriminants are clamped to zero and counted.
KSquaredCandidates k_squared_candidates(const RDecomposition& r);

/// Shape of the reference amplitude: modulus of the transform of the window
/// mask on the padded grid, cropped to object size.
RealMap k_shape(const WindowSpec& window, int grid_w, int grid_h, int object_w, int object_h);

/// Combined mode rescales k_shape so its maximum matches the square root of
/// the largest '+' candidate for K^2; Zero mode returns K = 0. P = 0 in both.
KApproximation approximate_K(const RDecomposition& r, const WindowSpec& window,
                             int grid_w, int grid_h, int object_w, int object_h, KMode mode);

/// Vector-arctan phase recovery E = P + atan2(R3, R2 + K^2), range (-pi, pi]
/// around P. Pixels with both arguments zero fall back to E = P and are counted.
PhaseRecovery recover_phase_algebraic(const RDecomposition& r, const RealMap& K, const RealMap& P);

/// Amplitude recovery C = sqrt(max(R1, 0)) / B. Pixels with illumination at
/// or below b_floor yield 0 and are counted; an entirely dark illumination map
/// is rejected.
AmplitudeRecovery recover_amplitude(const RealMap& r1, const RealMap& b, double b_floor = 1e-12);

} // namespace qpi

#endif
