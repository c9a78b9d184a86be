#pragma once

#include <vector>

#include "holo/gaussian_set.hpp"

namespace holo {

// Regularization and clamping constants shared by the forward/backward math.
inline constexpr double kEpsScale = 0.1;      // floor added to exp() scales
inline constexpr double kEpsCov = 0.1;        // diagonal regularizer on the covariance
inline constexpr double kEpsDet = 1e-10;      // determinant guard for inversion
inline constexpr double kPowerFloor = -50.0;  // exponent clamp in the Gaussian kernel
inline constexpr double kAlphaCap = 0.99;     // effective-opacity saturation
inline constexpr double kAlphaCutoff = 1.0 / 255.0;  // contribution skip threshold

struct Covariance2 {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
};

struct InverseCovariance2 {
    double inv00 = 0.0, inv01 = 0.0, inv11 = 0.0;
};

struct CovarianceInverse {
    InverseCovariance2 inv;
    double radius = 0.0;  // 3-sigma screen-space bounding radius
};

// Activated (physical-domain) view of one primitive.
struct ActivatedGaussian {
    double position[2];
    double scale[2];
    double rotation = 0.0;
    double opacity = 0.0;
    std::vector<double> amplitude;  // C, clamped to [0,1]
    std::vector<double> phase;      // C
};

// pre -> ((tanh(pre)+1)/2)*extent, strictly inside (0, extent)
double activate_position(double pre, double extent);
// d activated / d pre = (extent/2)*(1 - tanh^2)
double activate_position_deriv(double pre, double extent);

// pre -> exp(pre) + kEpsScale
double activate_scale(double pre);
double activate_scale_deriv(double pre);

// logistic sigmoid
double activate_opacity(double pre);
double activate_opacity_deriv(double pre);

// clamp to [0,1]; derivative is zero outside the clamp
double activate_amplitude(double raw);
double activate_amplitude_deriv(double raw);

// Maps a pixel-space position back to the unconstrained domain (atanh).
// Values on the boundary must be nudged inward by the caller.
double unactivate_position(double value, double extent);

// Sigma = R(theta) * diag(s)^2 * R(theta)^T + kEpsCov * I, expanded entries.
Covariance2 covariance(double sx, double sy, double theta);

// Adjugate inversion with det clamped below by kEpsDet, plus the 3-sigma
// bounding radius from the larger eigenvalue of Sigma.
CovarianceInverse invert_covariance(const Covariance2& cov);

// Activates primitive n of the set against a width x height canvas.
ActivatedGaussian activate(const GaussianSet& set, int n, int width, int height);

}  // namespace holo
