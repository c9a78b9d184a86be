#pragma once

#include <string>

#include "holo/complex_field.hpp"
#include "holo/gaussian_set.hpp"

namespace holo {

// Complex-field container "CGHF": magic, u16 version, u32 C/H/W, u8 dtype
// (0 = f32, 1 = f64), planar real planes then imag planes, little-endian.
// Writers default to f64 so load(persist(x)) == x bit-exactly.
void write_field(const std::string& path, const ComplexField& field, bool as_f64 = true);
ComplexField read_field(const std::string& path);

// Gaussian-set container "CGGS": magic, u16 version, u32 N, u32 C, then the
// six parameter arrays in declaration order, f32 little-endian.
void write_gaussians(const std::string& path, const GaussianSet& set);
GaussianSet read_gaussians(const std::string& path);

// 8-bit PNG ingest with sRGB decode to linear [0,1]; C is 1 or 3.
RealField read_image_linear(const std::string& path);
// Linear [0,1] -> sRGB 8-bit PNG (values clipped to [0,1]).
void write_image_srgb(const std::string& path, const RealField& img);

// Depth ingest: 8- or 16-bit grayscale PNG normalized to [0,1], no transform.
RealField read_depth(const std::string& path);
// Raw [0,1] -> grayscale PNG at the given bit depth (8 or 16), no transform.
void write_depth_png(const std::string& path, const RealField& depth, int bit_depth = 8);

// Phase raster in [0, 2pi) quantized to 8-bit levels; one grayscale PNG per
// call (single-channel input). Re-import lands on bin centers.
void write_phase_png(const std::string& path, const RealField& phase, int channel);
RealField read_phase_png(const std::string& path);

double srgb_to_linear(double s);
double linear_to_srgb(double l);

// Writes via a temp file in the same directory, then renames.
void atomic_write(const std::string& path, const std::string& bytes);

}  // namespace holo
