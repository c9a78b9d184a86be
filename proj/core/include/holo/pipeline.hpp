#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holo/complex_field.hpp"
#include "holo/convert.hpp"
#include "holo/gaussian_set.hpp"
#include "holo/loss.hpp"
#include "holo/propagation.hpp"

namespace holo {

enum class RunMode { complex_field, smooth_poh, random_poh };

struct RunConfig {
    std::string image_path;
    std::string depth_path;  // optional when plane_count == 1
    int width = 0, height = 0, channels = 0;  // 0 means take from the image

    // Exactly one of these selects N: an explicit count, or a ratio r giving
    // N = 2*C*H*W / (12*r) (Gaussian scalars versus a dense complex raster).
    int gaussian_count = 0;
    double parameter_ratio = 0.0;

    int plane_count = 1;
    double center_distance = 3e-3;  // meters
    double plane_spacing = 2e-3;    // meters
    bool near_is_high = true;       // depth 1.0 maps to the nearest plane

    PropagationSpec propagation;
    int steps = 2000;
    uint64_t seed = 0;
    int threads = 1;
    std::string output_dir;
    RunMode mode = RunMode::complex_field;
    RandomPohOptions conversion;  // used by the random_poh mode
    bool log_progress = false;    // stderr loss prints every 50 steps
};

// JSON config file covering every RunConfig field; missing keys keep the
// defaults above. Throws on unknown mode names or if both/neither of
// gaussian_count and parameter_ratio are given.
RunConfig load_run_config(const std::string& path);

struct Metrics {
    std::vector<double> psnr;  // dB per plane; +inf for identical images
    std::vector<double> ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

// 10*log10(1/MSE) with peak 1.0; both rasters are clipped to [0,1] first.
double psnr_value(const RealField& recon, const RealField& target);

Metrics compute_metrics(const std::vector<RealField>& recon, const RealField& target);

// N from the count/ratio invariant (count wins when positive, at least 1).
int resolve_gaussian_count(const RunConfig& cfg, int channels, int width, int height);

// Uniform positions over [0,W]x[0,H] mapped through atanh (boundary samples
// nudged inward by 1e-6 of the dimension), amplitudes uniform in [0,1],
// scales log(1.5)/log(5.0), phase 0, opacity -0.5, rotation 0.
GaussianSet init_gaussians(int count, int channels, int width, int height, uint64_t seed);

struct TrainResult {
    GaussianSet gaussians;
    ComplexField field;  // final rasterized hologram
    Metrics metrics;
    std::vector<double> loss_history;       // one entry per 50 steps plus the final step
    std::vector<int> loss_history_steps;    // 1-based step numbers for the entries
    Metrics poh_metrics;                    // filled by the POH modes
};

// Full optimization run: ingest, init, rasterize/propagate/loss/step loop,
// metrics, artifacts under output_dir (when set). The POH modes additionally
// convert the final field and score the converted hologram.
TrainResult train(const RunConfig& config);

// Persists field/gaussians/reconstructions/metrics/logs under dir.
void write_artifacts(const std::string& dir, const RunConfig& config, const TrainResult& result,
                     const std::vector<RealField>& recon, const PhaseOnlyHologram* poh,
                     const std::vector<RealField>* poh_recon);

}  // namespace holo
