#ifndef QPI_CORE_OBJECTS_HPP
#define QPI_CORE_OBJECTS_HPP

#include "forward.hpp"
#include "types.hpp"

#include <cstdint>

namespace qpi {

enum class ObjectKind { ComplexStructured, PurePhase, Blobs, Vortex, TiltBackground };

/// Recipe for a synthetic test object. phase_range bounds the generated
/// phase ([0, phase_range] exactly for the noise-based kinds and the tilt
/// ramp); Vortex ignores it and winds over [0, 2*pi). Amplitude spans
/// [amplitude_min, amplitude_min * amplitude_contrast] for ComplexStructured
/// and is 1 everywhere for the other kinds.
struct ObjectRecipe {
    ObjectKind kind = ObjectKind::ComplexStructured;
    int size = 256;
    double phase_range = 4.0;
    double amplitude_min = 0.01;
    double amplitude_contrast = 100.0;
    int topological_number = 16; // Vortex
    int blob_count = 20;         // Blobs
    double blob_radius = 12.0;   // Blobs, pixels
    std::uint64_t seed = 1;
};

/// Deterministic for a fixed seed; identical recipes produce bit-identical
/// objects. Grid sizes follow the pipeline restriction: even and >= 4.
ObjectSpec generate(const ObjectRecipe& recipe);

} // namespace qpi

#endif
