#pragma once

#include <functional>
#include <vector>

#include "holo/complex_field.hpp"
#include "holo/gaussian_set.hpp"
#include "holo/loss.hpp"
#include "holo/propagation.hpp"

namespace holo::oracle {

// Plain double loop over (pixel, primitive) with the same clamp semantics as
// the tiled rasterizer but a fully separate arithmetic path: inline
// activations, explicit 2x2 matrix products, no tiling, no culling.
ComplexField brute_rasterize(const GaussianSet& set, int width, int height);

// Branch counters from a brute pass; finite-difference checks use them to
// reject coordinates whose perturbation crosses a clamp boundary.
struct BruteCounters {
    long long skipped = 0;    // alpha_eff below the 1/255 cutoff
    long long saturated = 0;  // alpha * G capped at 0.99
    long long floored = 0;    // exponent clamped at -50
};

ComplexField brute_rasterize_counted(const GaussianSet& set, int width, int height,
                                     BruteCounters& counters);

// Explicit row-column double-sum DFT propagation with the same band-limit,
// transfer, and aperture semantics. Dims are capped at 64 per side; the cost
// is O(N^3) per axis and this is reference code only.
ComplexField direct_dft_propagate(const ComplexField& field, const PropagationSpec& spec,
                                  double distance);

struct FiniteDiffSpec {
    double h = 1e-4;
};

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, const FiniteDiffSpec& spec = {});

// Scalar-loop loss references; accumulation grouping and variance formulas
// deliberately differ from the loss module.
double loop_mse(const std::vector<RealField>& recon, const TargetStack& target);
double loop_recon(const std::vector<RealField>& recon, const TargetStack& target);
double loop_ssim(const std::vector<RealField>& recon, const TargetStack& target);

}  // namespace holo::oracle
