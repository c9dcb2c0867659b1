#ifndef QPI_CORE_FORWARD_HPP
#define QPI_CORE_FORWARD_HPP

#include "field.hpp"
#include "types.hpp"

#include <array>
#include <cstdint>

namespace qpi {

/// Object on the input plane of the 4f system. The effective complex object
/// is B*C * exp(i*E); the illumination B defaults to 1 everywhere.
struct ObjectSpec {
    RealMap amplitude;    // C, >= 0
    RealMap phase;        // E, radians
    RealMap illumination; // B, >= 0
    int pad_factor = 6;

    ObjectSpec() = default;
    ObjectSpec(RealMap C, RealMap E, int pad = 6);
    ObjectSpec(RealMap C, RealMap E, RealMap B, int pad = 6);

    int width() const { return amplitude.width(); }
    int height() const { return amplitude.height(); }

    /// Combined amplitude B*C.
    RealMap combined_amplitude() const;
};

enum class NoiseKind { None, AdditiveGaussian, Quantize16 };

/// Sensor noise applied to simulated intensities, after the deterministic
/// optical simulation. The generator is seeded per call.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Image-plane field with the phase of the windowed spectrum region shifted
/// by t radians: crop(idft(dft(pad(B*C*exp(iE))) * exp(i*t*w))).
/// With t = 0 this returns the object field exactly.
ComplexField propagate_with_modulation(const ObjectSpec& obj, const WindowSpec& window, double t);

/// Reference wave K*exp(iP): the image-plane field when only the windowed
/// spectrum region passes, crop(idft(dft(pad(B*C*exp(iE))) * w)).
ComplexField reference_field(const ObjectSpec& obj, const WindowSpec& window);

/// Windowed low-pass of an arbitrary spatial field on a pad_factor-times
/// larger grid. Shared by reference_field and the iterative reference update.
ComplexField windowed_lowpass(const ComplexField& field, const WindowSpec& window, int pad_factor);

/// Per-pixel squared modulus.
RealMap intensity(const ComplexField& field);

/// The three measured intensities I_k = |propagate(obj, window, t_k)|^2,
/// with noise applied last. Shifts must be pairwise distinct modulo 2*pi.
std::array<RealMap, 3> simulate_triple(const ObjectSpec& obj, const WindowSpec& window,
                                       const PhaseShiftTriple& shifts, const NoiseSpec& noise);

/// Algebraic intensity model:
///   I(t) = Cbar^2 + (2cos t - 2)(Cbar*K*cos(E-P) - K^2) + (2sin t)*Cbar*K*sin(E-P)
RealMap predicted_intensity(const RealMap& cbar, const RealMap& K,
                            const RealMap& E, const RealMap& P, double t);

/// Applies the configured noise to an intensity map.
RealMap apply_noise(const RealMap& intensity_map, const NoiseSpec& noise);

} // namespace qpi

#endif
