#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace holo {

// C-channel complex raster stored as separate planar real/imag arrays,
// row-major within each H x W plane.
struct ComplexField {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> real;
    std::vector<double> imag;

    ComplexField() = default;
    ComplexField(int c, int h, int w)
        : channels(c), height(h), width(w),
          real(static_cast<size_t>(c) * h * w, 0.0),
          imag(static_cast<size_t>(c) * h * w, 0.0) {
        if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("ComplexField: non-positive dims");
    }

    size_t size() const { return real.size(); }
    size_t idx(int c, int y, int x) const {
        return (static_cast<size_t>(c) * height + y) * width + x;
    }
    double& re(int c, int y, int x) { return real[idx(c, y, x)]; }
    double& im(int c, int y, int x) { return imag[idx(c, y, x)]; }
    double re(int c, int y, int x) const { return real[idx(c, y, x)]; }
    double im(int c, int y, int x) const { return imag[idx(c, y, x)]; }

    bool same_shape(const ComplexField& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

// Real-valued raster stack with the same planar layout (intensities,
// per-pixel loss gradients, phase rasters).
struct RealField {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    RealField() = default;
    RealField(int c, int h, int w)
        : channels(c), height(h), width(w), values(static_cast<size_t>(c) * h * w, 0.0) {
        if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("RealField: non-positive dims");
    }

    size_t idx(int c, int y, int x) const {
        return (static_cast<size_t>(c) * height + y) * width + x;
    }
    double& at(int c, int y, int x) { return values[idx(c, y, x)]; }
    double at(int c, int y, int x) const { return values[idx(c, y, x)]; }

    bool same_shape(const RealField& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

// Per-channel squared magnitude |u|^2.
RealField intensity_of(const ComplexField& u);

}  // namespace holo
