#pragma once

#include <cstdint>
#include <vector>

#include "holo/complex_field.hpp"

namespace holo {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;  // (0.01*R)^2, R = 1
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kSsimWeight = 0.005;  // lambda_1 in the training loss

struct DepthPlaneSet {
    int count = 0;
    double center_distance = 0.0;  // d0, meters
    double spacing = 0.0;          // dz, meters
    std::vector<double> distances;
};

// d_l = d0 + (l - (L-1)/2) * dz for l = 0..L-1 (nearest plane first).
DepthPlaneSet make_depth_planes(int count, double center_distance, double spacing);

// One bitmap per plane, H*W bytes each; the planes partition the pixels.
using MaskStack = std::vector<std::vector<uint8_t>>;

struct TargetStack {
    RealField intensity;  // C x H x W, linear, in [0,1]
    RealField depth;      // 1 x H x W, in [0,1]
    MaskStack masks;
};

// Quantizes depth into plane_count equal-width bins. With near_is_high,
// depth 1.0 maps to plane 0 (the nearest plane).
MaskStack build_masks(const RealField& depth, int plane_count, bool near_is_high);

TargetStack make_target_stack(const RealField& intensity, const RealField& depth, int plane_count,
                              bool near_is_high);

// recon holds one C x H x W intensity stack per plane; the same target
// intensity is compared at every plane. All norms are means over C*H*W.
double loss_mse(const std::vector<RealField>& recon, const TargetStack& target);
double loss_recon(const std::vector<RealField>& recon, const TargetStack& target);
double loss_ssim(const std::vector<RealField>& recon, const TargetStack& target);
double training_loss(const std::vector<RealField>& recon, const TargetStack& target);

// Gradient variants fill d(loss)/d(recon) and return the loss value.
double loss_mse_grad(const std::vector<RealField>& recon, const TargetStack& target,
                     std::vector<RealField>& grads);
double loss_recon_grad(const std::vector<RealField>& recon, const TargetStack& target,
                       std::vector<RealField>& grads);
double loss_ssim_grad(const std::vector<RealField>& recon, const TargetStack& target,
                      std::vector<RealField>& grads);
double training_loss_grad(const std::vector<RealField>& recon, const TargetStack& target,
                          std::vector<RealField>& grads);

// Three-term penalty of one reconstruction against a single plane's mask:
// mean((I - t)^2 * (1 + M + t^2)). When grad is non-null it receives
// d(loss)/d(I); the conversion stage and its tests share this arithmetic.
double plane_recon_loss(const RealField& recon, const TargetStack& target, size_t plane,
                        RealField* grad = nullptr);

// Mean SSIM between two C x H x W stacks (11x11 Gaussian window, sigma 1.5,
// valid-window convolution). Also used by the metrics reporting.
double ssim_value(const RealField& a, const RealField& b);

}  // namespace holo
