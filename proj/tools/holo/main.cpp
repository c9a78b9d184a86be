#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "holo/convert.hpp"
#include "holo/io.hpp"
#include "holo/oracles.hpp"
#include "holo/parallel.hpp"
#include "holo/pipeline.hpp"
#include "holo/propagation.hpp"

namespace {

using namespace holo;

std::string metrics_line(const Metrics& m) {
    std::string s;
    char buf[96];
    for (size_t l = 0; l < m.psnr.size(); ++l) {
        std::snprintf(buf, sizeof(buf), "plane %zu psnr %.4f dB ssim %.4f\n", l, m.psnr[l],
                      m.ssim[l]);
        s += buf;
    }
    std::snprintf(buf, sizeof(buf), "mean psnr %.4f dB ssim %.4f\n", m.mean_psnr, m.mean_ssim);
    s += buf;
    return s;
}

// Wavelength defaults: RGB triple for 3 channels, green alone for 1.
void fit_wavelengths(PropagationSpec& spec, int channels) {
    if (static_cast<int>(spec.wavelengths.size()) == channels) return;
    if (spec.wavelengths != PropagationSpec{}.wavelengths)
        throw std::invalid_argument("one wavelength per channel required");
    if (channels == 1)
        spec.wavelengths = {532e-9};
    else if (channels != 3)
        throw std::invalid_argument("no default wavelengths for this channel count");
}

void write_poh_outputs(const std::string& dir, const PhaseOnlyHologram& poh) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    for (int c = 0; c < poh.phase.channels; ++c)
        write_phase_png((base / ("poh_c" + std::to_string(c) + ".png")).string(), poh.phase, c);
    write_field((base / "poh.cghf").string(), poh_field(poh));
}

int run_train(const std::string& config_path, bool has_seed, uint64_t seed, bool has_steps,
              int steps, bool has_threads, int threads, bool has_output,
              const std::string& output) {
    RunConfig cfg = load_run_config(config_path);
    if (has_seed) {
        cfg.seed = seed;
        cfg.conversion.seed = seed;
    }
    if (has_steps) cfg.steps = steps;
    if (has_threads) cfg.threads = threads;
    if (has_output) cfg.output_dir = output;
    cfg.log_progress = true;
    const TrainResult result = train(cfg);
    std::printf("%s", metrics_line(result.metrics).c_str());
    if (cfg.mode != RunMode::complex_field) {
        std::printf("phase-only hologram:\n%s", metrics_line(result.poh_metrics).c_str());
    }
    if (!cfg.output_dir.empty()) std::printf("artifacts in %s\n", cfg.output_dir.c_str());
    return 0;
}

int run_convert_smooth(const std::string& input, const std::string& output, bool classical) {
    const ComplexField field = read_field(input);
    const PhaseOnlyHologram poh =
        dpac_encode(field, classical ? DpacMode::classical : DpacMode::direct);
    write_poh_outputs(output, poh);
    std::printf("wrote smooth phase-only hologram to %s\n", output.c_str());
    return 0;
}

int run_convert_random(const std::string& input, const std::string& output,
                       const std::string& config_path, bool has_seed, uint64_t seed,
                       bool has_steps, int steps) {
    RunConfig cfg = load_run_config(config_path);
    if (has_seed) cfg.conversion.seed = seed;
    if (has_steps) cfg.conversion.steps = steps;

    const ComplexField guide = read_field(input);
    PropagationSpec spec = cfg.propagation;
    fit_wavelengths(spec, guide.channels);

    RealField image = read_image_linear(cfg.image_path);
    RealField depth;
    if (!cfg.depth_path.empty()) {
        depth = read_depth(cfg.depth_path);
    } else {
        if (cfg.plane_count > 1)
            throw std::invalid_argument("depth map required for multi-plane targets");
        depth = RealField(1, image.height, image.width);
    }
    const TargetStack target = make_target_stack(image, depth, cfg.plane_count, cfg.near_is_high);
    const DepthPlaneSet planes =
        make_depth_planes(cfg.plane_count, cfg.center_distance, cfg.plane_spacing);

    const RandomPohResult result =
        convert_random_poh_field(guide, planes, target, spec, cfg.conversion);
    write_poh_outputs(output, result.poh);

    const std::vector<ComplexField> outs =
        propagate_multi(poh_field(result.poh), spec, planes.distances);
    std::vector<RealField> intens;
    for (const auto& u : outs) intens.push_back(intensity_of(u));
    std::printf("%s", metrics_line(compute_metrics(intens, target.intensity)).c_str());
    std::printf("wrote random phase-only hologram to %s\n", output.c_str());
    return 0;
}

int run_propagate(const std::string& input, const std::string& output, double distance,
                  PropagationSpec spec, const std::vector<double>& wavelengths) {
    const ComplexField field = read_field(input);
    if (!wavelengths.empty()) spec.wavelengths = wavelengths;
    fit_wavelengths(spec, field.channels);
    write_field(output, propagate(field, spec, distance));
    std::printf("propagated %s by %g m -> %s\n", input.c_str(), distance, output.c_str());
    return 0;
}

int run_metrics(const std::string& recon_dir, const std::string& target_path) {
    const RealField target = read_image_linear(target_path);
    std::vector<RealField> recon;
    for (int l = 0;; ++l) {
        const std::filesystem::path p =
            std::filesystem::path(recon_dir) / ("recon_" + std::to_string(l) + ".png");
        if (!std::filesystem::exists(p)) break;
        recon.push_back(read_image_linear(p.string()));
    }
    if (recon.empty()) throw std::runtime_error("no recon_<l>.png files in " + recon_dir);
    std::printf("%s", metrics_line(compute_metrics(recon, target)).c_str());
    return 0;
}

int run_oracle(const std::string& op, const std::string& input, const std::string& output,
               int width, int height, double distance, PropagationSpec spec,
               const std::vector<double>& wavelengths) {
    if (op == "raster") {
        const GaussianSet set = read_gaussians(input);
        write_field(output, oracle::brute_rasterize(set, width, height));
        std::printf("brute raster %dx%d -> %s\n", width, height, output.c_str());
        return 0;
    }
    if (op == "propagate") {
        const ComplexField field = read_field(input);
        if (!wavelengths.empty()) spec.wavelengths = wavelengths;
        fit_wavelengths(spec, field.channels);
        write_field(output, oracle::direct_dft_propagate(field, spec, distance));
        std::printf("direct dft propagate by %g m -> %s\n", distance, output.c_str());
        return 0;
    }
    throw std::invalid_argument("oracle op must be raster or propagate");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-primitive holography toolkit"};
    app.require_subcommand(1);

    std::string config_path, input, output, mode, oracle_op;
    uint64_t seed = 0;
    int steps = 0, threads = 0, width = 0, height = 0;
    double distance = 0.0;
    bool classical = false;
    PropagationSpec spec;
    std::vector<double> wavelengths;

    auto add_spec_options = [&](CLI::App* cmd) {
        cmd->add_option("--pitch", spec.pixel_pitch, "pixel pitch in meters");
        cmd->add_option("--pad", spec.pad_factor, "zero-padding factor");
        cmd->add_option("--aperture", spec.aperture_radius, "aperture radius in frequency pixels");
        cmd->add_option("--wavelength", wavelengths, "wavelength per channel in meters");
    };

    CLI::App* train_cmd = app.add_subcommand("train", "optimize a hologram from a config file");
    train_cmd->add_option("--config", config_path, "JSON run config")->required();
    train_cmd->add_option("--seed", seed, "override config seed");
    train_cmd->add_option("--steps", steps, "override step count");
    train_cmd->add_option("--threads", threads, "override worker thread count");
    train_cmd->add_option("--output", output, "override output directory");

    CLI::App* convert_cmd = app.add_subcommand("convert", "convert a complex field to a phase-only hologram");
    convert_cmd->add_option("--mode", mode, "smooth | random")->required();
    convert_cmd->add_option("--input", input, "input field (.cghf)")->required();
    convert_cmd->add_option("--output", output, "output directory")->required();
    convert_cmd->add_option("--config", config_path, "run config (required for random mode)");
    convert_cmd->add_flag("--classical", classical, "classical double-phase split for smooth mode");
    convert_cmd->add_option("--seed", seed, "override conversion seed");
    convert_cmd->add_option("--steps", steps, "override conversion step count");
    convert_cmd->add_option("--threads", threads, "worker thread count");

    CLI::App* prop_cmd = app.add_subcommand("propagate", "free-space propagate a field");
    prop_cmd->add_option("--input", input, "input field (.cghf)")->required();
    prop_cmd->add_option("--distance", distance, "propagation distance in meters")->required();
    prop_cmd->add_option("--output", output, "output field (.cghf)")->required();
    prop_cmd->add_option("--threads", threads, "worker thread count");
    add_spec_options(prop_cmd);

    CLI::App* metrics_cmd = app.add_subcommand("metrics", "score reconstructions against a target image");
    metrics_cmd->add_option("--recon", input, "directory with recon_<l>.png files")->required();
    metrics_cmd->add_option("--target", output, "target image (.png)")->required();

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "reference implementations");
    oracle_cmd->group("");  // hidden
    oracle_cmd->add_option("--op", oracle_op, "raster | propagate")->required();
    oracle_cmd->add_option("--input", input, "input file");
    oracle_cmd->add_option("--output", output, "output field (.cghf)")->required();
    oracle_cmd->add_option("--width", width, "canvas width (raster op)");
    oracle_cmd->add_option("--height", height, "canvas height (raster op)");
    oracle_cmd->add_option("--distance", distance, "distance in meters (propagate op)");
    add_spec_options(oracle_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) holo::set_thread_count(threads);
        if (train_cmd->parsed())
            return run_train(config_path, train_cmd->count("--seed") > 0, seed,
                             train_cmd->count("--steps") > 0, steps,
                             train_cmd->count("--threads") > 0, threads,
                             train_cmd->count("--output") > 0, output);
        if (convert_cmd->parsed()) {
            if (mode == "smooth") return run_convert_smooth(input, output, classical);
            if (mode == "random") {
                if (config_path.empty())
                    throw std::invalid_argument("random mode needs --config for target and planes");
                return run_convert_random(input, output, config_path,
                                          convert_cmd->count("--seed") > 0, seed,
                                          convert_cmd->count("--steps") > 0, steps);
            }
            throw std::invalid_argument("convert mode must be smooth or random");
        }
        if (prop_cmd->parsed()) return run_propagate(input, output, distance, spec, wavelengths);
        if (metrics_cmd->parsed()) return run_metrics(input, output);
        if (oracle_cmd->parsed())
            return run_oracle(oracle_op, input, output, width, height, distance, spec, wavelengths);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
