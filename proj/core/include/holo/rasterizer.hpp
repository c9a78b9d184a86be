#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "holo/complex_field.hpp"
#include "holo/gaussian_set.hpp"

namespace holo {

inline constexpr int kTileSize = 16;

// Sorted (tile, gaussian) assignment produced by duplicate-with-keys.
// `pairs` is sorted by (tile, id); `ranges[t]` is the [begin, end) slice of
// `pairs` for tile t (row-major tile order). Every Gaussian whose bounding
// box overlaps a tile appears exactly once in that tile's range.
struct TileIndex {
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    std::vector<std::pair<size_t, size_t>> ranges;
};

TileIndex build_tile_index(const GaussianSet& set, int width, int height);

// Tile-based forward pass: field(c,p) = sum_n c_{n,c} * alpha_eff * e^{j phi}.
// alpha_eff = min(0.99, alpha * exp(max(power, -50))); contributions below
// 1/255 are skipped. Per-pixel accumulation runs in ascending Gaussian id,
// so the output is bit-identical for any thread count.
ComplexField rasterize_forward(const GaussianSet& set, int width, int height);

// Analytic gradients of a scalar loss with upstream dL/d(real), dL/d(imag).
// Skipped contributions and the 0.99 saturation gate the opacity/shape
// branches to zero, matching the forward clamp semantics.
GaussianSetGrads rasterize_backward(const GaussianSet& set, const RealField& grad_real,
                                    const RealField& grad_imag);

}  // namespace holo
