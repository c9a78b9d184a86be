#include "holo/field_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "holo/complex_field.hpp"

namespace holo {

double activate_position(double pre, double extent) {
    if (!std::isfinite(pre)) throw std::invalid_argument("activate_position: non-finite input");
    return (std::tanh(pre) + 1.0) * 0.5 * extent;
}

double activate_position_deriv(double pre, double extent) {
    const double t = std::tanh(pre);
    return 0.5 * extent * (1.0 - t * t);
}

double activate_scale(double pre) {
    if (!std::isfinite(pre)) throw std::invalid_argument("activate_scale: non-finite input");
    return std::exp(pre) + kEpsScale;
}

double activate_scale_deriv(double pre) { return std::exp(pre); }

double activate_opacity(double pre) {
    if (!std::isfinite(pre)) throw std::invalid_argument("activate_opacity: non-finite input");
    return 1.0 / (1.0 + std::exp(-pre));
}

double activate_opacity_deriv(double pre) {
    const double s = activate_opacity(pre);
    return s * (1.0 - s);
}

double activate_amplitude(double raw) { return std::clamp(raw, 0.0, 1.0); }

double activate_amplitude_deriv(double raw) { return (raw >= 0.0 && raw <= 1.0) ? 1.0 : 0.0; }

double unactivate_position(double value, double extent) {
    return std::atanh(2.0 * value / extent - 1.0);
}

Covariance2 covariance(double sx, double sy, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double sx2 = sx * sx, sy2 = sy * sy;
    Covariance2 out;
    out.sxx = sx2 * c * c + sy2 * s * s + kEpsCov;
    out.sxy = (sx2 - sy2) * c * s;
    out.syy = sx2 * s * s + sy2 * c * c + kEpsCov;
    return out;
}

CovarianceInverse invert_covariance(const Covariance2& cov) {
    const double det = cov.sxx * cov.syy - cov.sxy * cov.sxy;
    const double det_safe = std::max(det, kEpsDet);
    CovarianceInverse out;
    out.inv.inv00 = cov.syy / det_safe;
    out.inv.inv01 = -cov.sxy / det_safe;
    out.inv.inv11 = cov.sxx / det_safe;
    const double mid = 0.5 * (cov.sxx + cov.syy);
    const double half_diff = 0.5 * (cov.sxx - cov.syy);
    const double lambda_max = mid + std::sqrt(std::max(half_diff * half_diff + cov.sxy * cov.sxy, 0.0));
    out.radius = 3.0 * std::sqrt(std::max(lambda_max, 0.0));
    return out;
}

ActivatedGaussian activate(const GaussianSet& set, int n, int width, int height) {
    if (n < 0 || n >= set.count) throw std::out_of_range("activate: primitive index");
    ActivatedGaussian g;
    g.position[0] = activate_position(set.pre_position[2 * n], width);
    g.position[1] = activate_position(set.pre_position[2 * n + 1], height);
    g.scale[0] = activate_scale(set.pre_scale[2 * n]);
    g.scale[1] = activate_scale(set.pre_scale[2 * n + 1]);
    g.rotation = set.rotation[n];
    g.opacity = activate_opacity(set.pre_opacity[n]);
    g.amplitude.resize(set.channels);
    g.phase.resize(set.channels);
    for (int c = 0; c < set.channels; ++c) {
        g.amplitude[c] = activate_amplitude(set.amplitude[static_cast<size_t>(n) * set.channels + c]);
        g.phase[c] = set.phase[static_cast<size_t>(n) * set.channels + c];
    }
    return g;
}

RealField intensity_of(const ComplexField& u) {
    RealField out(u.channels, u.height, u.width);
    for (size_t i = 0; i < u.size(); ++i)
        out.values[i] = u.real[i] * u.real[i] + u.imag[i] * u.imag[i];
    return out;
}

}  // namespace holo
