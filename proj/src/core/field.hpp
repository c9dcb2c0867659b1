#ifndef QPI_CORE_FIELD_HPP
#define QPI_CORE_FIELD_HPP

#include "types.hpp"

namespace qpi {

/// Builds amp * exp(i*phase) on the spatial plane. Both maps must share
/// dimensions and amp must be non-negative.
ComplexField from_amp_phase(const RealMap& amp, const RealMap& phase);

/// Centered unitary 2D DFT: DC sits at (w/2, h/2) in both domains and the
/// transform is scaled by 1/sqrt(w*h) so Parseval holds without factors.
/// The domain tag of the result is toggled.
ComplexField dft2_centered(const ComplexField& field);

/// Exact inverse of dft2_centered (same centering and scaling).
ComplexField idft2_centered(const ComplexField& field);

/// Embeds the field in the middle of a zero grid of the target size,
/// keeping the DC pixel (w/2, h/2) aligned. Energy is unchanged.
ComplexField pad_center(const ComplexField& field, int target_w, int target_h);

/// Extracts the centered block of the target size; inverse of pad_center.
ComplexField crop_center(const ComplexField& field, int target_w, int target_h);

/// Binary mask of the phase-shifting window on a grid of the given size.
/// The window must be odd-sized and lie entirely inside the grid.
RealMap window_mask(const WindowSpec& spec, int grid_w, int grid_h);

/// Sum of squared moduli.
double energy(const ComplexField& field);
double energy(const RealMap& map);

} // namespace qpi

#endif
