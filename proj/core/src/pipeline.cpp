#include "holo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "holo/field_core.hpp"
#include "holo/io.hpp"
#include "holo/optimizer.hpp"
#include "holo/parallel.hpp"
#include "holo/rasterizer.hpp"
#include "holo/rng.hpp"

namespace holo {

namespace {

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RunMode parse_mode(const std::string& s) {
    if (s == "complex") return RunMode::complex_field;
    if (s == "smooth_poh") return RunMode::smooth_poh;
    if (s == "random_poh") return RunMode::random_poh;
    throw std::invalid_argument("config: unknown mode '" + s + "'");
}

const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::complex_field: return "complex";
        case RunMode::smooth_poh: return "smooth_poh";
        case RunMode::random_poh: return "random_poh";
    }
    return "complex";
}

RealField clipped(const RealField& f) {
    RealField out = f;
    for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
    return out;
}

std::string metrics_text(const Metrics& m) {
    std::string s;
    for (size_t l = 0; l < m.psnr.size(); ++l)
        s += "plane " + std::to_string(l) + " psnr " + fmt_g(m.psnr[l]) + " ssim " +
             fmt_g(m.ssim[l]) + "\n";
    s += "mean psnr " + fmt_g(m.mean_psnr) + " ssim " + fmt_g(m.mean_ssim) + "\n";
    return s;
}

std::vector<RealField> reconstruct(const ComplexField& field, const PropagationSpec& spec,
                                   const std::vector<double>& distances) {
    const std::vector<ComplexField> outs = propagate_multi(field, spec, distances);
    std::vector<RealField> intens;
    intens.reserve(outs.size());
    for (const auto& u : outs) intens.push_back(intensity_of(u));
    return intens;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("config: parse error in " + path + ": " + e.what());
    }

    RunConfig c;
    c.image_path = j.value("image", std::string());
    c.depth_path = j.value("depth", std::string());
    c.width = j.value("width", 0);
    c.height = j.value("height", 0);
    c.channels = j.value("channels", 0);

    const bool has_count = j.contains("gaussian_count");
    const bool has_ratio = j.contains("parameter_ratio");
    if (has_count == has_ratio)
        throw std::invalid_argument(
            "config: exactly one of gaussian_count / parameter_ratio is required");
    if (has_count) c.gaussian_count = j.at("gaussian_count").get<int>();
    if (has_ratio) c.parameter_ratio = j.at("parameter_ratio").get<double>();

    if (j.contains("planes")) {
        const auto& p = j.at("planes");
        c.plane_count = p.value("count", 1);
        c.center_distance = p.value("center_distance", 3e-3);
        c.plane_spacing = p.value("spacing", 2e-3);
    }
    c.near_is_high = j.value("near_is_high", true);

    if (j.contains("propagation")) {
        const auto& p = j.at("propagation");
        if (p.contains("wavelengths"))
            c.propagation.wavelengths = p.at("wavelengths").get<std::vector<double>>();
        c.propagation.pixel_pitch = p.value("pixel_pitch", c.propagation.pixel_pitch);
        c.propagation.pad_factor = p.value("pad_factor", c.propagation.pad_factor);
        c.propagation.aperture_radius = p.value("aperture_radius", c.propagation.aperture_radius);
    }

    c.steps = j.value("steps", 2000);
    if (c.steps < 1) throw std::invalid_argument("config: steps must be >= 1");
    c.seed = j.value("seed", static_cast<uint64_t>(0));
    c.threads = j.value("threads", 1);
    c.output_dir = j.value("output_dir", std::string());
    c.mode = parse_mode(j.value("mode", std::string("complex")));

    c.conversion.seed = c.seed;
    if (j.contains("conversion")) {
        const auto& p = j.at("conversion");
        c.conversion.steps = p.value("steps", c.conversion.steps);
        c.conversion.seed = p.value("seed", c.conversion.seed);
        c.conversion.lambda_comp = p.value("lambda_comp", c.conversion.lambda_comp);
        c.conversion.lambda_field = p.value("lambda_field", c.conversion.lambda_field);
        c.conversion.lr = p.value("lr", c.conversion.lr);
        c.conversion.log_every = p.value("log_every", c.conversion.log_every);
    }
    return c;
}

double psnr_value(const RealField& recon, const RealField& target) {
    if (!recon.same_shape(target)) throw std::invalid_argument("psnr: shape mismatch");
    double mse = 0.0;
    for (size_t i = 0; i < recon.values.size(); ++i) {
        const double r = std::clamp(recon.values[i], 0.0, 1.0);
        const double t = std::clamp(target.values[i], 0.0, 1.0);
        const double d = r - t;
        mse += d * d;
    }
    mse /= static_cast<double>(recon.values.size());
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

Metrics compute_metrics(const std::vector<RealField>& recon, const RealField& target) {
    if (recon.empty()) throw std::invalid_argument("compute_metrics: no planes");
    Metrics m;
    const RealField t = clipped(target);
    for (const auto& r : recon) {
        const RealField rc = clipped(r);
        m.psnr.push_back(psnr_value(rc, t));
        m.ssim.push_back(ssim_value(rc, t));
    }
    for (double v : m.psnr) m.mean_psnr += v;
    for (double v : m.ssim) m.mean_ssim += v;
    m.mean_psnr /= static_cast<double>(m.psnr.size());
    m.mean_ssim /= static_cast<double>(m.ssim.size());
    return m;
}

int resolve_gaussian_count(const RunConfig& cfg, int channels, int width, int height) {
    if (cfg.gaussian_count > 0) return cfg.gaussian_count;
    if (cfg.parameter_ratio > 0.0) {
        const double dense = 2.0 * channels * width * height;
        const long n = std::lround(dense / (12.0 * cfg.parameter_ratio));
        return static_cast<int>(std::max(n, 1L));
    }
    throw std::invalid_argument("config: neither gaussian_count nor parameter_ratio set");
}

GaussianSet init_gaussians(int count, int channels, int width, int height, uint64_t seed) {
    if (count < 1) throw std::invalid_argument("init_gaussians: count must be >= 1");
    GaussianSet set(count, channels);
    Rng rng(seed);
    const double nudge_x = 1e-6 * width, nudge_y = 1e-6 * height;
    for (int n = 0; n < count; ++n) {
        double x = rng.uniform(0.0, static_cast<double>(width));
        double y = rng.uniform(0.0, static_cast<double>(height));
        if (x <= 0.0) x = nudge_x;
        if (x >= width) x = width - nudge_x;
        if (y <= 0.0) y = nudge_y;
        if (y >= height) y = height - nudge_y;
        set.pre_position[2 * n] = unactivate_position(x, width);
        set.pre_position[2 * n + 1] = unactivate_position(y, height);
        set.pre_scale[2 * n] = std::log(1.5);
        set.pre_scale[2 * n + 1] = std::log(5.0);
        set.rotation[n] = 0.0;
        set.pre_opacity[n] = -0.5;
    }
    for (int n = 0; n < count; ++n)
        for (int c = 0; c < channels; ++c) {
            set.amplitude[static_cast<size_t>(n) * channels + c] = rng.uniform();
            set.phase[static_cast<size_t>(n) * channels + c] = 0.0;
        }
    return set;
}

TrainResult train(const RunConfig& config) {
    if (config.threads >= 1) set_thread_count(config.threads);

    if (config.image_path.empty()) throw std::invalid_argument("train: image path required");
    RealField image = read_image_linear(config.image_path);
    if (config.channels > 0 && config.channels != image.channels)
        throw std::invalid_argument("train: image channel count does not match config");
    if (config.width > 0 && config.width != image.width)
        throw std::invalid_argument("train: image width does not match config");
    if (config.height > 0 && config.height != image.height)
        throw std::invalid_argument("train: image height does not match config");
    const int ch = image.channels, h = image.height, w = image.width;

    RealField depth;
    if (!config.depth_path.empty()) {
        depth = read_depth(config.depth_path);
        if (depth.height != h || depth.width != w)
            throw std::invalid_argument("train: depth size does not match image");
    } else {
        if (config.plane_count > 1)
            throw std::invalid_argument("train: depth map required for multi-plane targets");
        depth = RealField(1, h, w);
    }

    PropagationSpec spec = config.propagation;
    if (static_cast<size_t>(ch) != spec.wavelengths.size()) {
        // grayscale runs against the stock RGB triple collapse to green
        if (ch == 1 && spec.wavelengths == PropagationSpec{}.wavelengths)
            spec.wavelengths = {532e-9};
        else
            throw std::invalid_argument("train: one wavelength per channel required");
    }

    const TargetStack target = make_target_stack(image, depth, config.plane_count,
                                                 config.near_is_high);
    const DepthPlaneSet planes =
        make_depth_planes(config.plane_count, config.center_distance, config.plane_spacing);

    const int n = resolve_gaussian_count(config, ch, w, h);
    GaussianSet set = init_gaussians(n, ch, w, h, config.seed);

    Adan adan;
    adan.add_group("position", set.pre_position.size(), 1e-2);
    adan.add_group("scale", set.pre_scale.size(), 5e-3);
    adan.add_group("rotation", set.rotation.size(), 1e-3);
    adan.add_group("amplitude", set.amplitude.size(), 2.5e-3);
    adan.add_group("phase", set.phase.size(), 2.5e-3);
    adan.add_group("opacity", set.pre_opacity.size(), 2.5e-2);

    TrainResult result;
    const size_t planes_n = planes.distances.size();
    for (int step = 0; step < config.steps; ++step) {
        adan.set_lr("position", cosine_lr(step, config.steps, 1e-2, 1e-3));

        const ComplexField field = rasterize_forward(set, w, h);
        const std::vector<ComplexField> outs = propagate_multi(field, spec, planes.distances);
        std::vector<RealField> intens;
        intens.reserve(planes_n);
        for (const auto& u : outs) intens.push_back(intensity_of(u));

        std::vector<RealField> gi;
        const double loss = training_loss_grad(intens, target, gi);

        std::vector<ComplexField> du;
        du.reserve(planes_n);
        for (size_t l = 0; l < planes_n; ++l) {
            ComplexField g(ch, h, w);
            for (size_t i = 0; i < g.size(); ++i) {
                g.real[i] = 2.0 * outs[l].real[i] * gi[l].values[i];
                g.imag[i] = 2.0 * outs[l].imag[i] * gi[l].values[i];
            }
            du.push_back(std::move(g));
        }
        ComplexField back = propagate_multi_backward(du, spec, planes.distances);
        RealField grad_re(ch, h, w), grad_im(ch, h, w);
        grad_re.values = std::move(back.real);
        grad_im.values = std::move(back.imag);
        const GaussianSetGrads grads = rasterize_backward(set, grad_re, grad_im);

        adan.step("position", set.pre_position, grads.pre_position);
        adan.step("scale", set.pre_scale, grads.pre_scale);
        adan.step("rotation", set.rotation, grads.rotation);
        adan.step("amplitude", set.amplitude, grads.amplitude);
        adan.step("phase", set.phase, grads.phase);
        adan.step("opacity", set.pre_opacity, grads.pre_opacity);

        if ((step + 1) % 50 == 0 || step + 1 == config.steps) {
            if (result.loss_history_steps.empty() ||
                result.loss_history_steps.back() != step + 1) {
                result.loss_history.push_back(loss);
                result.loss_history_steps.push_back(step + 1);
            }
            if (config.log_progress)
                std::fprintf(stderr, "step %d loss %.8g\n", step + 1, loss);
        }
    }

    result.gaussians = std::move(set);
    result.field = rasterize_forward(result.gaussians, w, h);
    const std::vector<RealField> recon = reconstruct(result.field, spec, planes.distances);
    result.metrics = compute_metrics(recon, target.intensity);

    PhaseOnlyHologram poh;
    std::vector<RealField> poh_recon;
    bool have_poh = false;
    if (config.mode == RunMode::smooth_poh) {
        poh = dpac_encode(result.field);
        have_poh = true;
    } else if (config.mode == RunMode::random_poh) {
        const RandomPohResult conv =
            convert_random_poh(result.gaussians, planes, target, spec, config.conversion);
        poh = conv.poh;
        have_poh = true;
    }
    if (have_poh) {
        poh_recon = reconstruct(poh_field(poh), spec, planes.distances);
        result.poh_metrics = compute_metrics(poh_recon, target.intensity);
    }

    if (!config.output_dir.empty())
        write_artifacts(config.output_dir, config, result, recon, have_poh ? &poh : nullptr,
                        have_poh ? &poh_recon : nullptr);
    return result;
}

void write_artifacts(const std::string& dir, const RunConfig& config, const TrainResult& result,
                     const std::vector<RealField>& recon, const PhaseOnlyHologram* poh,
                     const std::vector<RealField>* poh_recon) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);

    write_field((base / "field.cghf").string(), result.field);
    write_gaussians((base / "gaussians.cggs").string(), result.gaussians);
    for (size_t l = 0; l < recon.size(); ++l)
        write_image_srgb((base / ("recon_" + std::to_string(l) + ".png")).string(),
                         clipped(recon[l]));
    atomic_write((base / "metrics.txt").string(), metrics_text(result.metrics));

    std::string log;
    for (size_t i = 0; i < result.loss_history.size(); ++i)
        log += "step " + std::to_string(result.loss_history_steps[i]) + " loss " +
               fmt_g(result.loss_history[i]) + "\n";
    atomic_write((base / "loss_log.txt").string(), log);

    const int ch = result.field.channels;
    const long long scalars =
        config.mode == RunMode::random_poh
            ? static_cast<long long>(ch) * result.field.height * result.field.width
            : static_cast<long long>(result.gaussians.count) * 12;
    std::string info;
    info += std::string("mode ") + mode_name(config.mode) + "\n";
    info += "seed " + std::to_string(config.seed) + "\n";
    info += "steps " + std::to_string(config.steps) + "\n";
    info += "width " + std::to_string(result.field.width) + "\n";
    info += "height " + std::to_string(result.field.height) + "\n";
    info += "channels " + std::to_string(ch) + "\n";
    info += "planes " + std::to_string(config.plane_count) + "\n";
    info += "gaussians " + std::to_string(result.gaussians.count) + "\n";
    info += "trainable_scalars " + std::to_string(scalars) + "\n";
    atomic_write((base / "run_info.txt").string(), info);

    if (poh) {
        for (int c = 0; c < poh->phase.channels; ++c)
            write_phase_png((base / ("poh_c" + std::to_string(c) + ".png")).string(), poh->phase,
                            c);
        write_field((base / "poh.cghf").string(), poh_field(*poh));
        if (poh_recon) {
            for (size_t l = 0; l < poh_recon->size(); ++l)
                write_image_srgb((base / ("poh_recon_" + std::to_string(l) + ".png")).string(),
                                 clipped((*poh_recon)[l]));
            atomic_write((base / "poh_metrics.txt").string(), metrics_text(result.poh_metrics));
        }
    }
}

}  // namespace holo
