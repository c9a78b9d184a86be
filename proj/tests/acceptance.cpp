// Acceptance gate: ten numbered criteria, one PASS/FAIL line each.
// Run with no arguments for the full gate, or pass criterion numbers to
// run a subset (exit code 0 only if every executed criterion passed).
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "holo/convert.hpp"
#include "holo/field_core.hpp"
#include "holo/io.hpp"
#include "holo/loss.hpp"
#include "holo/oracles.hpp"
#include "holo/parallel.hpp"
#include "holo/pipeline.hpp"
#include "holo/propagation.hpp"
#include "holo/rasterizer.hpp"
#include "test_util.hpp"

using namespace holo;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

bool report(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    return pass;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---- criterion 1: tiled rasterizer vs brute-force oracle ----

bool criterion1() {
    Timer timer;
    double max_err = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int w = 17 + (i * 11) % 48;
        const int h = 12 + (i * 7) % 53;
        const int n = 1 + (i * 5) % 16;
        const int c = (i % 2) ? 3 : 1;
        const GaussianSet set = testutil::random_set(1000 + i, n, c, w, h);
        const ComplexField tiled = rasterize_forward(set, w, h);
        const ComplexField brute = oracle::brute_rasterize(set, w, h);
        for (size_t k = 0; k < tiled.size(); ++k) {
            max_err = std::max(max_err, std::abs(tiled.real[k] - brute.real[k]));
            max_err = std::max(max_err, std::abs(tiled.imag[k] - brute.imag[k]));
        }
    }
    const double secs = timer.seconds();
    const bool pass = max_err <= 1e-6 && secs <= 10.0;
    return report(1, pass,
                  "tiled rasterizer vs brute force on 20 fixtures: max |err| " + num(max_err) +
                      " (limit 1e-6), " + num(secs) + "s (limit 10s)");
}

// ---- criterion 2: analytic gradients vs central finite differences ----

bool criterion2() {
    Timer timer;
    const double h = 1e-4;
    const int w = 32, hh = 24, n = 6, c = 2;
    GaussianSet set = testutil::random_set(2000, n, c, w, hh);
    const RealField wre = testutil::random_real(2001, c, hh, w, -1.0, 1.0);
    const RealField wim = testutil::random_real(2002, c, hh, w, -1.0, 1.0);

    const auto loss_of = [&](const GaussianSet& s, oracle::BruteCounters& counters) {
        const ComplexField f = oracle::brute_rasterize_counted(s, w, hh, counters);
        double l = 0.0;
        for (size_t i = 0; i < f.size(); ++i)
            l += wre.values[i] * f.real[i] + wim.values[i] * f.imag[i];
        return l;
    };
    const GaussianSetGrads analytic = rasterize_backward(set, wre, wim);

    struct Group {
        const char* name;
        std::vector<double> GaussianSet::*member;
        bool clamped;
    };
    const Group groups[] = {
        {"position", &GaussianSet::pre_position, false},
        {"scale", &GaussianSet::pre_scale, false},
        {"rotation", &GaussianSet::rotation, false},
        {"amplitude", &GaussianSet::amplitude, true},
        {"phase", &GaussianSet::phase, false},
        {"opacity", &GaussianSet::pre_opacity, false},
    };

    double max_rel = 0.0;
    long checked = 0, excluded = 0;
    std::string worst;
    for (const Group& g : groups) {
        std::vector<double>& params = set.*(g.member);
        const std::vector<double>& ag = analytic.*(g.member);
        for (size_t i = 0; i < params.size(); ++i) {
            const double v = params[i];
            if (g.clamped && (std::abs(v) < 2.0 * h || std::abs(v - 1.0) < 2.0 * h)) {
                ++excluded;
                continue;
            }
            oracle::BruteCounters cp, cm;
            params[i] = v + h;
            const double fp = loss_of(set, cp);
            params[i] = v - h;
            const double fm = loss_of(set, cm);
            params[i] = v;
            if (cp.skipped != cm.skipped || cp.saturated != cm.saturated ||
                cp.floored != cm.floored) {
                ++excluded;  // perturbation crossed a clamp boundary
                continue;
            }
            const double fd = (fp - fm) / (2.0 * h);
            const double rel = std::abs(ag[i] - fd) / std::max({std::abs(ag[i]), std::abs(fd), 1e-6});
            ++checked;
            if (rel > max_rel) {
                max_rel = rel;
                worst = std::string(g.name) + "[" + std::to_string(i) + "]";
            }
        }
    }
    const double secs = timer.seconds();
    const bool pass = checked > 0 && max_rel <= 1e-4 && secs <= 60.0;
    return report(2, pass,
                  "six gradient groups vs finite differences: max rel " + num(max_rel) +
                      " (limit 1e-4) at " + (worst.empty() ? "-" : worst) + ", " +
                      std::to_string(checked) + " coords checked, " + std::to_string(excluded) +
                      " at clamp boundaries, " + num(secs) + "s (limit 60s)");
}

// ---- criterion 3: FFT propagation vs direct DFT oracle ----

bool criterion3() {
    PropagationSpec spec;
    spec.wavelengths = {532e-9};
    double max_err = 0.0;
    const double distances[] = {0.0, 2.5e-3, 5e-3, 7.5e-3, 1e-2};
    int i = 0;
    for (double d : distances) {
        const ComplexField u = testutil::random_field(3000 + i++, 1, 64, 64);
        const ComplexField fast = propagate(u, spec, d);
        const ComplexField slow = oracle::direct_dft_propagate(u, spec, d);
        for (size_t k = 0; k < fast.size(); ++k) {
            max_err = std::max(max_err, std::abs(fast.real[k] - slow.real[k]));
            max_err = std::max(max_err, std::abs(fast.imag[k] - slow.imag[k]));
        }
    }
    const bool pass = max_err <= 1e-5;
    return report(3, pass,
                  "64x64 propagation vs direct DFT over 5 distances in [0, 10mm]: max |err| " +
                      num(max_err) + " (limit 1e-5)");
}

// ---- criterion 4: in-band energy conservation and adjoint identity ----

bool criterion4() {
    PropagationSpec unpadded;
    unpadded.wavelengths = {532e-9};
    unpadded.pad_factor = 1;

    const auto energy = [](const ComplexField& f) {
        double e = 0.0;
        for (size_t i = 0; i < f.size(); ++i)
            e += f.real[i] * f.real[i] + f.imag[i] * f.imag[i];
        return e;
    };

    double max_parseval = 0.0;
    for (double d : {1e-3, 5e-3}) {
        const ComplexField u = testutil::random_field(4000 + static_cast<int>(d * 1e4), 1, 48, 48);
        const ComplexField banded = propagate_with_mask_distance(u, unpadded, 0.0, d);
        const ComplexField out = propagate(banded, unpadded, d);
        const double e0 = energy(banded);
        max_parseval = std::max(max_parseval, std::abs(energy(out) - e0) / e0);
    }

    PropagationSpec padded;
    padded.wavelengths = {532e-9};
    double max_adjoint = 0.0;
    for (int i = 0; i < 10; ++i) {
        const ComplexField u = testutil::random_field(4100 + i, 1, 32, 48);
        const ComplexField v = testutil::random_field(4200 + i, 1, 32, 48);
        const double d = 3e-3;
        const ComplexField pu = propagate(u, padded, d);
        const ComplexField pv = propagate_backward(v, padded, d);
        std::complex<double> lhs = 0.0, rhs = 0.0;
        for (size_t k = 0; k < u.size(); ++k) {
            lhs += std::conj(std::complex<double>(pu.real[k], pu.imag[k])) *
                   std::complex<double>(v.real[k], v.imag[k]);
            rhs += std::conj(std::complex<double>(u.real[k], u.imag[k])) *
                   std::complex<double>(pv.real[k], pv.imag[k]);
        }
        max_adjoint =
            std::max(max_adjoint, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
    }

    const bool pass = max_parseval <= 1e-6 && max_adjoint <= 1e-6;
    return report(4, pass,
                  "in-band Parseval rel err " + num(max_parseval) +
                      ", adjoint identity rel err " + num(max_adjoint) +
                      " over 10 pairs (limits 1e-6)");
}

// ---- criterion 5: loss values against loop oracles, gradients against FD ----

bool criterion5() {
    // zero on identical inputs
    const RealField img = testutil::random_real(5000, 1, 32, 32, 0.0, 1.0);
    const RealField dep = testutil::random_real(5001, 1, 32, 32, 0.0, 1.0);
    const TargetStack target = make_target_stack(img, dep, 2, true);
    const std::vector<RealField> same{target.intensity, target.intensity};
    const double z_mse = loss_mse(same, target);
    const double z_recon = loss_recon(same, target);
    const double z_ssim = loss_ssim(same, target);
    const bool zeros = z_mse == 0.0 && z_recon == 0.0 && std::abs(z_ssim) <= 1e-12;

    // loop-oracle equality on random stacks
    double d_mse = 0.0, d_recon = 0.0, d_ssim = 0.0;
    for (int i = 0; i < 3; ++i) {
        std::vector<RealField> recon{testutil::random_real(5100 + i, 1, 32, 32, 0.0, 1.2),
                                     testutil::random_real(5200 + i, 1, 32, 32, 0.0, 1.2)};
        d_mse = std::max(d_mse, std::abs(loss_mse(recon, target) - oracle::loop_mse(recon, target)));
        d_recon = std::max(d_recon,
                           std::abs(loss_recon(recon, target) - oracle::loop_recon(recon, target)));
        d_ssim = std::max(d_ssim,
                          std::abs(loss_ssim(recon, target) - oracle::loop_ssim(recon, target)));
    }
    const bool loops = d_mse <= 1e-10 && d_recon <= 1e-10 && d_ssim <= 1e-6;

    // gradient checks on a 16x16 two-plane fixture
    const RealField simg = testutil::random_real(5300, 1, 16, 16, 0.0, 1.0);
    const RealField sdep = testutil::random_real(5301, 1, 16, 16, 0.0, 1.0);
    const TargetStack starget = make_target_stack(simg, sdep, 2, true);
    std::vector<RealField> srecon{testutil::random_real(5302, 1, 16, 16, 0.0, 1.2),
                                  testutil::random_real(5303, 1, 16, 16, 0.0, 1.2)};
    const size_t plane_n = srecon[0].values.size();

    using LossGradFn = std::function<double(const std::vector<RealField>&, const TargetStack&,
                                            std::vector<RealField>&)>;
    const std::pair<const char*, LossGradFn> losses[] = {
        {"mse", loss_mse_grad},
        {"recon", loss_recon_grad},
        {"ssim", loss_ssim_grad},
        {"training", training_loss_grad},
    };
    double max_rel = 0.0;
    std::string worst;
    for (const auto& [name, fn] : losses) {
        std::vector<RealField> grads;
        fn(srecon, starget, grads);
        std::vector<double> x;
        for (const auto& r : srecon) x.insert(x.end(), r.values.begin(), r.values.end());
        const auto eval = [&](const std::vector<double>& xs) {
            std::vector<RealField> rs = srecon;
            for (size_t l = 0; l < rs.size(); ++l)
                std::copy(xs.begin() + l * plane_n, xs.begin() + (l + 1) * plane_n,
                          rs[l].values.begin());
            std::vector<RealField> unused;
            return fn(rs, starget, unused);
        };
        const std::vector<double> fd = oracle::finite_diff_grad(eval, x);
        for (size_t l = 0; l < srecon.size(); ++l)
            for (size_t i = 0; i < plane_n; ++i) {
                const double a = grads[l].values[i];
                const double f = fd[l * plane_n + i];
                const double rel = std::abs(a - f) / std::max({std::abs(a), std::abs(f), 1e-6});
                if (rel > max_rel) {
                    max_rel = rel;
                    worst = name;
                }
            }
    }
    const bool gradients = max_rel <= 1e-5;

    const bool pass = zeros && loops && gradients;
    return report(5, pass,
                  "losses zero on identical inputs: " + std::string(zeros ? "yes" : "NO") +
                      "; loop-oracle diffs mse " + num(d_mse) + " recon " + num(d_recon) +
                      " (limit 1e-10) ssim " + num(d_ssim) + " (limit 1e-6); gradient max rel " +
                      num(max_rel) + " (limit 1e-5, worst " + (worst.empty() ? "-" : worst) + ")");
}

// ---- criteria 6 and 7: end-to-end desk regression and ratio monotonicity ----

struct DeskScene {
    std::string image, depth;
};

const DeskScene& desk_scene() {
    static const DeskScene scene = [] {
        DeskScene s;
        const std::string dir = testutil::temp_dir("acceptance_desk");
        s.image = dir + "/img.png";
        s.depth = dir + "/depth.png";
        write_image_srgb(s.image, testutil::synthetic_image(42, 1, 160, 256));
        write_depth_png(s.depth, testutil::synthetic_depth(43, 160, 256), 16);
        return s;
    }();
    return scene;
}

RunConfig desk_config(double ratio) {
    RunConfig c;
    c.image_path = desk_scene().image;
    c.depth_path = desk_scene().depth;
    c.parameter_ratio = ratio;
    c.plane_count = 2;
    c.center_distance = 3e-3;
    c.plane_spacing = 2e-3;
    c.propagation.wavelengths = {532e-9};
    c.steps = 2000;
    c.seed = 42;
    c.threads = 1;
    return c;
}

struct DeskResult {
    double psnr = 0.0, ssim = 0.0, seconds = 0.0;
};

DeskResult run_desk(double ratio) {
    Timer timer;
    const TrainResult r = train(desk_config(ratio));
    return {r.metrics.mean_psnr, r.metrics.mean_ssim, timer.seconds()};
}

std::optional<DeskResult> g_ratio2;

const DeskResult& desk_ratio2() {
    if (!g_ratio2) g_ratio2 = run_desk(2.0);
    return *g_ratio2;
}

bool criterion6() {
    const DeskResult r = desk_ratio2();
    const bool pass = r.psnr >= 24.0 && r.ssim >= 0.80;
    return report(6, pass,
                  "256x160 two-plane run, ratio 2:1, 2000 steps: mean PSNR " + num(r.psnr) +
                      " dB (limit 24), mean SSIM " + num(r.ssim) + " (limit 0.80), " +
                      num(r.seconds) + "s (target 600s)");
}

bool criterion7() {
    const double p2 = desk_ratio2().psnr;
    const double p5 = run_desk(5.0).psnr;
    const double p10 = run_desk(10.0).psnr;
    const bool pass = p2 >= p5 && p5 >= p10;
    return report(7, pass,
                  "PSNR vs parameter ratio is nonincreasing: 2:1 " + num(p2) + " dB, 5:1 " +
                      num(p5) + " dB, 10:1 " + num(p10) + " dB");
}

// ---- criterion 8: guided vs unguided random-phase conversion ----

double poh_mean_psnr(const PhaseOnlyHologram& poh, const PropagationSpec& spec,
                     const DepthPlaneSet& planes, const TargetStack& target) {
    const std::vector<ComplexField> outs = propagate_multi(poh_field(poh), spec, planes.distances);
    std::vector<RealField> recon;
    recon.reserve(outs.size());
    for (const auto& u : outs) recon.push_back(intensity_of(u));
    return compute_metrics(recon, target.intensity).mean_psnr;
}

bool criterion8() {
    const std::string dir = testutil::temp_dir("acceptance_guide");
    const std::string image = dir + "/img.png";
    const std::string depth = dir + "/depth.png";
    write_image_srgb(image, testutil::synthetic_image(60, 1, 80, 128));
    write_depth_png(depth, testutil::synthetic_depth(61, 80, 128), 16);

    RunConfig cfg;
    cfg.image_path = image;
    cfg.depth_path = depth;
    cfg.parameter_ratio = 2.0;
    cfg.plane_count = 2;
    cfg.center_distance = 3e-3;
    cfg.plane_spacing = 2e-3;
    cfg.propagation.wavelengths = {532e-9};
    cfg.steps = 800;
    cfg.seed = 42;
    cfg.threads = 1;
    const TrainResult guide = train(cfg);

    const TargetStack target =
        make_target_stack(read_image_linear(image), read_depth(depth), 2, true);
    const DepthPlaneSet planes = make_depth_planes(2, 3e-3, 2e-3);

    RandomPohOptions guided_opt;
    guided_opt.steps = 600;
    guided_opt.seed = 7;
    RandomPohOptions unguided_opt = guided_opt;
    unguided_opt.lambda_comp = 0.0;
    unguided_opt.lambda_field = 0.0;

    const RandomPohResult guided =
        convert_random_poh(guide.gaussians, planes, target, cfg.propagation, guided_opt);
    const RandomPohResult unguided =
        convert_random_poh(guide.gaussians, planes, target, cfg.propagation, unguided_opt);

    const double pg = poh_mean_psnr(guided.poh, cfg.propagation, planes, target);
    const double pu = poh_mean_psnr(unguided.poh, cfg.propagation, planes, target);
    const bool pass = pg - pu >= 2.0;
    return report(8, pass,
                  "128x80 random-phase conversion, 600 steps, paired seeds: guided " + num(pg) +
                      " dB vs unguided " + num(pu) + " dB, gain " + num(pg - pu) +
                      " dB (limit +2)");
}

// ---- criterion 9: double-phase encoding structure ----

bool criterion9() {
    const ComplexField field = testutil::random_field(9000, 3, 17, 23);
    const PhaseOnlyHologram poh = dpac_encode(field);

    // independent two-branch reference: full amplitude raster, full phase
    // raster, then checkerboard interleave
    const size_t px = static_cast<size_t>(17) * 23;
    long long mismatches = 0;
    for (int c = 0; c < 3; ++c) {
        double amax = 0.0;
        for (size_t i = 0; i < px; ++i)
            amax = std::max(amax, std::hypot(field.real[c * px + i], field.imag[c * px + i]));
        std::vector<double> amp_branch(px), phase_branch(px);
        for (size_t i = 0; i < px; ++i) {
            amp_branch[i] =
                canonicalize_phase(std::hypot(field.real[c * px + i], field.imag[c * px + i]) / amax);
            phase_branch[i] =
                canonicalize_phase(std::atan2(field.imag[c * px + i], field.real[c * px + i]));
        }
        for (int y = 0; y < 17; ++y)
            for (int x = 0; x < 23; ++x) {
                const size_t i = static_cast<size_t>(y) * 23 + x;
                const double expect = (y + x) % 2 == 0 ? amp_branch[i] : phase_branch[i];
                if (poh.phase.values[c * px + i] != expect) ++mismatches;
            }
    }

    const ComplexField unit = poh_field(poh);
    double mag_err = 0.0;
    for (size_t i = 0; i < unit.size(); ++i)
        mag_err = std::max(mag_err, std::abs(std::hypot(unit.real[i], unit.imag[i]) - 1.0));

    const bool pass = mismatches == 0 && mag_err <= 1e-12;
    return report(9, pass,
                  "double-phase encoding vs two-branch oracle: " + std::to_string(mismatches) +
                      " mismatches (exact match required), unit-magnitude err " + num(mag_err) +
                      " (limit 1e-12)");
}

// ---- criterion 10: determinism across repeats and thread counts ----

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

double parse_mean_psnr(const std::string& metrics) {
    const size_t pos = metrics.find("mean psnr ");
    if (pos == std::string::npos) throw std::runtime_error("metrics file lacks a mean psnr line");
    return std::strtod(metrics.c_str() + pos + 10, nullptr);
}

bool criterion10() {
    const std::string dir = testutil::temp_dir("acceptance_det");
    const std::string image = dir + "/img.png";
    const std::string depth = dir + "/depth.png";
    write_image_srgb(image, testutil::synthetic_image(80, 1, 64, 96));
    write_depth_png(depth, testutil::synthetic_depth(81, 64, 96), 8);

    RunConfig cfg;
    cfg.image_path = image;
    cfg.depth_path = depth;
    cfg.gaussian_count = 96;
    cfg.plane_count = 2;
    cfg.propagation.wavelengths = {532e-9};
    cfg.steps = 60;
    cfg.seed = 11;
    cfg.threads = 1;

    cfg.output_dir = dir + "/a";
    train(cfg);
    cfg.output_dir = dir + "/b";
    train(cfg);
    const std::string ma = slurp(dir + "/a/metrics.txt");
    const bool identical = ma == slurp(dir + "/b/metrics.txt") &&
                           slurp(dir + "/a/field.cghf") == slurp(dir + "/b/field.cghf");

    cfg.threads = 4;
    cfg.output_dir = dir + "/t4";
    train(cfg);
    set_thread_count(1);
    const double psnr_diff =
        std::abs(parse_mean_psnr(ma) - parse_mean_psnr(slurp(dir + "/t4/metrics.txt")));

    const bool pass = identical && psnr_diff <= 1e-4;
    return report(10, pass,
                  std::string("repeat single-thread runs byte-identical: ") +
                      (identical ? "yes" : "NO") + "; 1 vs 4 thread PSNR diff " + num(psnr_diff) +
                      " dB (limit 1e-4)");
}

bool guard(int id, bool (*fn)()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return report(id, false, std::string("unhandled exception: ") + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    const auto enabled = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

    bool (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                            criterion6, criterion7, criterion8, criterion9, criterion10};
    int ran = 0, passed = 0;
    for (int id = 1; id <= 10; ++id) {
        if (!enabled(id)) continue;
        ++ran;
        if (guard(id, criteria[id - 1])) ++passed;
    }
    std::printf("acceptance: %d/%d criteria passed\n", passed, ran);
    return passed == ran ? 0 : 1;
}
