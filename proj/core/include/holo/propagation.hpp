#pragma once

#include <vector>

#include "holo/complex_field.hpp"

namespace holo {

struct PropagationSpec {
    std::vector<double> wavelengths = {639e-9, 532e-9, 473e-9};  // meters, per channel
    double pixel_pitch = 3.74e-6;                                // meters
    int pad_factor = 2;      // zero-padding multiple per dimension
    double aperture_radius = 0.0;  // padded-frequency-grid pixels; 0 disables
};

struct TransferFunctionSample {
    double fx = 0.0, fy = 0.0;  // cycles/meter
    double kz = 0.0;            // rad/meter
    bool inside_bandlimit = false;
};

// Samples the band-limited transfer function on the padded frequency grid in
// centered layout (zero frequency at (nx/2, ny/2)), row-major iy-outer.
// |H| = 1 inside the bandlimit, 0 outside; kz = sqrt(max(k^2 - (2pi)^2 f^2, 0)).
std::vector<TransferFunctionSample> transfer_function(const PropagationSpec& spec, double distance,
                                                      int channel, int padded_nx, int padded_ny);

// Band-limited angular spectrum propagation: centered zero-pad, FFT, transfer
// multiply (zero outside the bandlimit), optional circular aperture mask,
// inverse FFT, centered crop. Negative distances propagate backward.
ComplexField propagate(const ComplexField& field, const PropagationSpec& spec, double distance);

// Same pipeline with the bandlimit/aperture evaluated at mask_distance while
// the phase advances by distance (used to fix the mask across compositions).
ComplexField propagate_with_mask_distance(const ComplexField& field, const PropagationSpec& spec,
                                          double distance, double mask_distance);

// Adjoint of propagate: identical masks, conjugate transfer.
ComplexField propagate_backward(const ComplexField& grad_out, const PropagationSpec& spec,
                                double distance);

// Multi-plane forward sharing one forward FFT per channel.
std::vector<ComplexField> propagate_multi(const ComplexField& field, const PropagationSpec& spec,
                                          const std::vector<double>& distances);

// Sum over planes of the adjoint, sharing one inverse FFT per channel.
ComplexField propagate_multi_backward(const std::vector<ComplexField>& grads,
                                      const PropagationSpec& spec,
                                      const std::vector<double>& distances);

}  // namespace holo
