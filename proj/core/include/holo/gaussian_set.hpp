#pragma once

#include <cstdint>
#include <vector>

namespace holo {

// N complex-valued 2D Gaussian primitives in pre-activation parameter space.
// These are the optimization variables; activations (field_core.hpp) map them
// to physical quantities. Positions/scales are stored xy-interleaved,
// amplitude/phase are N x C row-major.
struct GaussianSet {
    int count = 0;     // N
    int channels = 0;  // C
    std::vector<double> pre_position;  // 2N, unconstrained
    std::vector<double> pre_scale;     // 2N, log-domain
    std::vector<double> rotation;      // N, radians
    std::vector<double> amplitude;     // N*C, clamped to [0,1] on activation
    std::vector<double> phase;         // N*C, radians
    std::vector<double> pre_opacity;   // N, unconstrained

    GaussianSet() = default;
    GaussianSet(int n, int c);

    // Throws std::invalid_argument on shape mismatch or non-finite entries.
    void validate() const;

    // Concatenates the primitives of two sets (channels must agree).
    static GaussianSet concat(const GaussianSet& a, const GaussianSet& b);
};

// Gradients w.r.t. every pre-activation parameter, same layout as the set.
using GaussianSetGrads = GaussianSet;

}  // namespace holo
