#include "holo/convert.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "holo/optimizer.hpp"
#include "holo/rasterizer.hpp"
#include "holo/rng.hpp"

namespace holo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double canonicalize_phase(double value) {
    double r = std::fmod(value, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

void canonicalize_phase(RealField& raster) {
    for (double& v : raster.values) v = canonicalize_phase(v);
}

PhaseOnlyHologram dpac_encode(const ComplexField& field, DpacMode mode) {
    const int ch = field.channels, h = field.height, w = field.width;
    const size_t px = static_cast<size_t>(h) * w;
    PhaseOnlyHologram out;
    out.format = PohFormat::smooth;
    out.phase = RealField(ch, h, w);
    for (int c = 0; c < ch; ++c) {
        const double* re = field.real.data() + c * px;
        const double* im = field.imag.data() + c * px;
        double amax = 0.0;
        for (size_t i = 0; i < px; ++i)
            amax = std::max(amax, std::hypot(re[i], im[i]));
        double* dst = out.phase.values.data() + c * px;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                const double amp = amax > 0.0 ? std::hypot(re[i], im[i]) / amax : 0.0;
                const double phi = std::atan2(im[i], re[i]);
                double v;
                if (mode == DpacMode::direct) {
                    v = (y + x) % 2 == 0 ? amp : phi;
                } else {
                    const double delta = std::acos(std::min(amp, 1.0));
                    v = (y + x) % 2 == 0 ? phi + delta : phi - delta;
                }
                dst[i] = canonicalize_phase(v);
            }
    }
    return out;
}

ComplexField poh_field(const PhaseOnlyHologram& poh) {
    ComplexField f(poh.phase.channels, poh.phase.height, poh.phase.width);
    for (size_t i = 0; i < poh.phase.values.size(); ++i) {
        f.real[i] = std::cos(poh.phase.values[i]);
        f.imag[i] = std::sin(poh.phase.values[i]);
    }
    return f;
}

RandomPohResult convert_random_poh_field(const ComplexField& guide_field,
                                         const DepthPlaneSet& planes, const TargetStack& target,
                                         const PropagationSpec& spec,
                                         const RandomPohOptions& opt) {
    const int ch = guide_field.channels, h = guide_field.height, w = guide_field.width;
    if (ch != target.intensity.channels || h != target.intensity.height ||
        w != target.intensity.width)
        throw std::invalid_argument("convert_random_poh: guide/target shape mismatch");
    if (planes.distances.empty())
        throw std::invalid_argument("convert_random_poh: no depth planes");
    if (target.masks.size() != planes.distances.size())
        throw std::invalid_argument("convert_random_poh: plane/mask count mismatch");
    if (opt.steps < 1) throw std::invalid_argument("convert_random_poh: steps must be >= 1");

    const size_t n = guide_field.size();
    const size_t planes_n = planes.distances.size();
    const bool use_comp = opt.lambda_comp != 0.0;
    const bool use_field = opt.lambda_field != 0.0;

    // The guide branch is frozen: propagate it once and keep its per-plane
    // outputs, intensities, and (constant) reconstruction penalties.
    const std::vector<ComplexField> guide_out = propagate_multi(guide_field, spec, planes.distances);
    std::vector<RealField> guide_int;
    std::vector<double> guide_term(planes_n, 0.0);
    guide_int.reserve(planes_n);
    for (size_t l = 0; l < planes_n; ++l) {
        guide_int.push_back(intensity_of(guide_out[l]));
        guide_term[l] = plane_recon_loss(guide_int[l], target, l);
    }

    RealField phase(ch, h, w);
    Rng rng(opt.seed);
    for (double& v : phase.values) v = rng.uniform(-std::numbers::pi, std::numbers::pi);

    Adan adan;
    adan.add_group("phase", n, opt.lr);

    RandomPohResult result;
    std::vector<double> dphi(n);
    for (int step = 0; step < opt.steps; ++step) {
        ComplexField u0(ch, h, w);
        for (size_t i = 0; i < n; ++i) {
            u0.real[i] = std::cos(phase.values[i]);
            u0.imag[i] = std::sin(phase.values[i]);
        }
        const std::vector<ComplexField> outs = propagate_multi(u0, spec, planes.distances);

        double loss = 0.0;
        std::vector<ComplexField> du;
        du.reserve(planes_n);
        for (size_t l = 0; l < planes_n; ++l) {
            const ComplexField& ul = outs[l];
            const RealField il = intensity_of(ul);
            RealField gi;
            loss += guide_term[l];
            loss += plane_recon_loss(il, target, l, &gi);
            if (use_comp) {
                // squared L2 norm (a sum, unlike the mean-based recon terms)
                double s = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    const double d = guide_int[l].values[i] - il.values[i];
                    s += d * d;
                    gi.values[i] += opt.lambda_comp * (-2.0 * d);
                }
                loss += opt.lambda_comp * s;
            }
            ComplexField g(ch, h, w);
            for (size_t i = 0; i < n; ++i) {
                g.real[i] = 2.0 * ul.real[i] * gi.values[i];
                g.imag[i] = 2.0 * ul.imag[i] * gi.values[i];
            }
            if (use_field) {
                // L1 norm over real and imaginary parts, again a plain sum
                double s = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    const double dre = guide_out[l].real[i] - ul.real[i];
                    const double dim = guide_out[l].imag[i] - ul.imag[i];
                    s += std::abs(dre) + std::abs(dim);
                    // subgradient of |guide - u| w.r.t. u, zero at ties
                    const double sre = dre > 0.0 ? -1.0 : (dre < 0.0 ? 1.0 : 0.0);
                    const double sim = dim > 0.0 ? -1.0 : (dim < 0.0 ? 1.0 : 0.0);
                    g.real[i] += opt.lambda_field * sre;
                    g.imag[i] += opt.lambda_field * sim;
                }
                loss += opt.lambda_field * s;
            }
            du.push_back(std::move(g));
        }

        const ComplexField back = propagate_multi_backward(du, spec, planes.distances);
        for (size_t i = 0; i < n; ++i)
            dphi[i] = -std::sin(phase.values[i]) * back.real[i] +
                      std::cos(phase.values[i]) * back.imag[i];
        adan.step("phase", phase.values, dphi);

        const bool logged = opt.log_every > 0 && (step + 1) % opt.log_every == 0;
        if (logged || step + 1 == opt.steps) result.loss_history.push_back(loss);
    }

    canonicalize_phase(phase);
    result.poh.phase = std::move(phase);
    result.poh.format = PohFormat::random;
    return result;
}

RandomPohResult convert_random_poh(const GaussianSet& guide, const DepthPlaneSet& planes,
                                   const TargetStack& target, const PropagationSpec& spec,
                                   const RandomPohOptions& opt) {
    const ComplexField guide_field =
        rasterize_forward(guide, target.intensity.width, target.intensity.height);
    return convert_random_poh_field(guide_field, planes, target, spec, opt);
}

}  // namespace holo
