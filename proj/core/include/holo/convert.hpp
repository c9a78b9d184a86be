#pragma once

#include <cstdint>
#include <vector>

#include "holo/complex_field.hpp"
#include "holo/gaussian_set.hpp"
#include "holo/loss.hpp"
#include "holo/propagation.hpp"

namespace holo {

enum class PohFormat { smooth, random };
enum class DpacMode { direct, classical };

struct PhaseOnlyHologram {
    RealField phase;  // C x H x W, in [0, 2pi)
    PohFormat format = PohFormat::smooth;
};

// Reduces a value mod 2pi into [0, 2pi).
double canonicalize_phase(double value);
void canonicalize_phase(RealField& raster);

// Checkerboard phase/amplitude multiplexing. Amplitude is normalized by its
// per-channel maximum. The direct mode writes the normalized amplitude value
// itself into even (i+j) cells; the classical mode splits into
// phase +/- arccos(A/Amax) pairs instead.
PhaseOnlyHologram dpac_encode(const ComplexField& field, DpacMode mode = DpacMode::direct);

// Unit-amplitude complex field e^{j phase}.
ComplexField poh_field(const PhaseOnlyHologram& poh);

struct RandomPohOptions {
    int steps = 600;
    uint64_t seed = 0;
    double lambda_comp = 0.1;    // weights the summed squared intensity gap to the guide
    double lambda_field = 0.01;  // weights the summed complex-field L1 gap to the guide
    double lr = 2.5e-3;
    int log_every = 50;
};

struct RandomPohResult {
    PhaseOnlyHologram poh;
    std::vector<double> loss_history;  // one entry per log_every steps plus the final step
};

// Optimizes a randomly initialized phase raster against the target while the
// guide stays frozen; both branches propagate through identical operators.
// With both lambdas zero the guide contributes no gradient and the phase
// trajectory matches an unguided optimization of the same seed.
RandomPohResult convert_random_poh(const GaussianSet& guide, const DepthPlaneSet& planes,
                                   const TargetStack& target, const PropagationSpec& spec,
                                   const RandomPohOptions& opt);

// Same procedure with the guide already rasterized to a field.
RandomPohResult convert_random_poh_field(const ComplexField& guide_field,
                                         const DepthPlaneSet& planes, const TargetStack& target,
                                         const PropagationSpec& spec, const RandomPohOptions& opt);

}  // namespace holo
