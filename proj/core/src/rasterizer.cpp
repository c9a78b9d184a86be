#include "holo/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "holo/field_core.hpp"
#include "holo/parallel.hpp"

namespace holo {

namespace {

// Pre-check slack: pixels with mahal > cutoff + slack provably fail the
// literal alpha_eff < 1/255 test, so exp() can be skipped for them without
// changing any output value.
constexpr double kMahalSlack = 1e-9;

struct FlatGaussians {
    int count = 0, channels = 0;
    std::vector<double> px, py;
    std::vector<double> inv00, inv01, inv11;
    std::vector<double> opacity;
    std::vector<double> radius;        // tile-cull radius (>= 3 sigma)
    std::vector<double> mahal_cutoff;  // skip when mahal exceeds this
    std::vector<double> amp;           // N*C, clamped
    std::vector<double> cos_phi, sin_phi;
    std::vector<double> amp_cos, amp_sin;
    std::vector<double> sx, sy;
    std::vector<double> cov00, cov01, cov11;
};

FlatGaussians activate_flat(const GaussianSet& set, int width, int height) {
    const int n = set.count, ch = set.channels;
    FlatGaussians f;
    f.count = n;
    f.channels = ch;
    f.px.resize(n);
    f.py.resize(n);
    f.inv00.resize(n);
    f.inv01.resize(n);
    f.inv11.resize(n);
    f.opacity.resize(n);
    f.radius.resize(n);
    f.mahal_cutoff.resize(n);
    f.amp.resize(static_cast<size_t>(n) * ch);
    f.cos_phi.resize(static_cast<size_t>(n) * ch);
    f.sin_phi.resize(static_cast<size_t>(n) * ch);
    f.amp_cos.resize(static_cast<size_t>(n) * ch);
    f.amp_sin.resize(static_cast<size_t>(n) * ch);
    f.sx.resize(n);
    f.sy.resize(n);
    f.cov00.resize(n);
    f.cov01.resize(n);
    f.cov11.resize(n);
    for (int g = 0; g < n; ++g) {
        f.px[g] = activate_position(set.pre_position[2 * g], width);
        f.py[g] = activate_position(set.pre_position[2 * g + 1], height);
        f.sx[g] = activate_scale(set.pre_scale[2 * g]);
        f.sy[g] = activate_scale(set.pre_scale[2 * g + 1]);
        const Covariance2 cov = covariance(f.sx[g], f.sy[g], set.rotation[g]);
        f.cov00[g] = cov.sxx;
        f.cov01[g] = cov.sxy;
        f.cov11[g] = cov.syy;
        const CovarianceInverse ci = invert_covariance(cov);
        f.inv00[g] = ci.inv.inv00;
        f.inv01[g] = ci.inv.inv01;
        f.inv11[g] = ci.inv.inv11;
        const double alpha = activate_opacity(set.pre_opacity[g]);
        f.opacity[g] = alpha;
        // The 1/255 cutoff kills contributions where mahal > 2*ln(255*alpha),
        // which for alpha near 1 reaches past 3 sigma; the cull radius covers
        // whichever bound is larger, plus a one-pixel margin.
        const double cutoff = 2.0 * std::max(std::log(255.0 * alpha), 0.0);
        f.mahal_cutoff[g] = cutoff + kMahalSlack;
        const double sigma = ci.radius / 3.0;
        f.radius[g] = sigma * std::sqrt(std::max(9.0, cutoff)) + 1.0;
        for (int c = 0; c < ch; ++c) {
            const size_t i = static_cast<size_t>(g) * ch + c;
            f.amp[i] = activate_amplitude(set.amplitude[i]);
            f.cos_phi[i] = std::cos(set.phase[i]);
            f.sin_phi[i] = std::sin(set.phase[i]);
            f.amp_cos[i] = f.amp[i] * f.cos_phi[i];
            f.amp_sin[i] = f.amp[i] * f.sin_phi[i];
        }
    }
    return f;
}

TileIndex build_index(const FlatGaussians& f, int width, int height) {
    TileIndex idx;
    idx.tiles_x = (width + kTileSize - 1) / kTileSize;
    idx.tiles_y = (height + kTileSize - 1) / kTileSize;
    for (int g = 0; g < f.count; ++g) {
        const double r = f.radius[g];
        int tx0 = static_cast<int>(std::floor((f.px[g] - r) / kTileSize));
        int tx1 = static_cast<int>(std::floor((f.px[g] + r) / kTileSize));
        int ty0 = static_cast<int>(std::floor((f.py[g] - r) / kTileSize));
        int ty1 = static_cast<int>(std::floor((f.py[g] + r) / kTileSize));
        tx0 = std::max(tx0, 0);
        ty0 = std::max(ty0, 0);
        tx1 = std::min(tx1, idx.tiles_x - 1);
        ty1 = std::min(ty1, idx.tiles_y - 1);
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx)
                idx.pairs.emplace_back(static_cast<uint32_t>(ty * idx.tiles_x + tx),
                                       static_cast<uint32_t>(g));
    }
    std::sort(idx.pairs.begin(), idx.pairs.end());
    idx.ranges.assign(static_cast<size_t>(idx.tiles_x) * idx.tiles_y, {0, 0});
    size_t i = 0;
    while (i < idx.pairs.size()) {
        size_t j = i;
        while (j < idx.pairs.size() && idx.pairs[j].first == idx.pairs[i].first) ++j;
        idx.ranges[idx.pairs[i].first] = {i, j};
        i = j;
    }
    return idx;
}

}  // namespace

TileIndex build_tile_index(const GaussianSet& set, int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("build_tile_index: empty canvas");
    return build_index(activate_flat(set, width, height), width, height);
}

ComplexField rasterize_forward(const GaussianSet& set, int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("rasterize_forward: empty canvas");
    ComplexField out(set.channels, height, width);
    if (set.count == 0) return out;
    const FlatGaussians f = activate_flat(set, width, height);
    const TileIndex idx = build_index(f, width, height);
    const int ch = set.channels;
    const int tile_count = idx.tiles_x * idx.tiles_y;

    parallel_for(0, tile_count, [&](int64_t lo, int64_t hi) {
        std::vector<double> acc_re(static_cast<size_t>(ch) * kTileSize * kTileSize);
        std::vector<double> acc_im(acc_re.size());
        for (int64_t t = lo; t < hi; ++t) {
            const auto [rb, re] = idx.ranges[t];
            if (rb == re) continue;
            const int tx = static_cast<int>(t) % idx.tiles_x;
            const int ty = static_cast<int>(t) / idx.tiles_x;
            const int x0 = tx * kTileSize, x1 = std::min(x0 + kTileSize, width);
            const int y0 = ty * kTileSize, y1 = std::min(y0 + kTileSize, height);
            const int tw = x1 - x0, th = y1 - y0;
            std::fill(acc_re.begin(), acc_re.end(), 0.0);
            std::fill(acc_im.begin(), acc_im.end(), 0.0);
            for (size_t p = rb; p < re; ++p) {
                const int g = static_cast<int>(idx.pairs[p].second);
                const double px = f.px[g], py = f.py[g];
                const double i00 = f.inv00[g], i01 = f.inv01[g], i11 = f.inv11[g];
                const double cutoff = f.mahal_cutoff[g];
                const double alpha = f.opacity[g];
                const double r = f.radius[g];
                const int gx0 = std::max(x0, static_cast<int>(std::ceil(px - r)));
                const int gx1 = std::min(x1 - 1, static_cast<int>(std::floor(px + r)));
                const int gy0 = std::max(y0, static_cast<int>(std::ceil(py - r)));
                const int gy1 = std::min(y1 - 1, static_cast<int>(std::floor(py + r)));
                for (int y = gy0; y <= gy1; ++y) {
                    const double dy = y - py;
                    for (int x = gx0; x <= gx1; ++x) {
                        const double dx = x - px;
                        const double mahal = dx * dx * i00 + 2.0 * dx * dy * i01 + dy * dy * i11;
                        if (mahal > cutoff) continue;
                        const double power = std::max(-0.5 * mahal, kPowerFloor);
                        const double aeff = std::min(kAlphaCap, alpha * std::exp(power));
                        if (aeff < kAlphaCutoff) continue;
                        const size_t local = static_cast<size_t>(y - y0) * tw + (x - x0);
                        for (int c = 0; c < ch; ++c) {
                            const size_t gi = static_cast<size_t>(g) * ch + c;
                            acc_re[c * static_cast<size_t>(tw) * th + local] += f.amp_cos[gi] * aeff;
                            acc_im[c * static_cast<size_t>(tw) * th + local] += f.amp_sin[gi] * aeff;
                        }
                    }
                }
            }
            for (int c = 0; c < ch; ++c)
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) {
                        const size_t local =
                            c * static_cast<size_t>(tw) * th + static_cast<size_t>(y - y0) * tw + (x - x0);
                        out.re(c, y, x) = acc_re[local];
                        out.im(c, y, x) = acc_im[local];
                    }
        }
    });
    return out;
}

GaussianSetGrads rasterize_backward(const GaussianSet& set, const RealField& grad_real,
                                    const RealField& grad_imag) {
    if (!grad_real.same_shape(grad_imag) || grad_real.channels != set.channels)
        throw std::invalid_argument("rasterize_backward: gradient shape mismatch");
    const int width = grad_real.width, height = grad_real.height, ch = set.channels;
    GaussianSetGrads grads(set.count, ch);
    if (set.count == 0) return grads;
    const FlatGaussians f = activate_flat(set, width, height);

    parallel_for(0, set.count, [&](int64_t lo, int64_t hi) {
        std::vector<double> d_amp(ch), d_phase(ch);
        for (int64_t g = lo; g < hi; ++g) {
            const double px = f.px[g], py = f.py[g];
            const double i00 = f.inv00[g], i01 = f.inv01[g], i11 = f.inv11[g];
            const double cutoff = f.mahal_cutoff[g];
            const double alpha = f.opacity[g];
            const double r = f.radius[g];
            const int x0 = std::max(0, static_cast<int>(std::ceil(px - r)));
            const int x1 = std::min(width - 1, static_cast<int>(std::floor(px + r)));
            const int y0 = std::max(0, static_cast<int>(std::ceil(py - r)));
            const int y1 = std::min(height - 1, static_cast<int>(std::floor(py + r)));
            std::fill(d_amp.begin(), d_amp.end(), 0.0);
            std::fill(d_phase.begin(), d_phase.end(), 0.0);
            double d_alpha = 0.0, gmx = 0.0, gmy = 0.0;
            double ga = 0.0, gb = 0.0, gc = 0.0;
            for (int y = y0; y <= y1; ++y) {
                const double dy = y - py;
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - px;
                    const double mahal = dx * dx * i00 + 2.0 * dx * dy * i01 + dy * dy * i11;
                    if (mahal > cutoff) continue;
                    const double power = std::max(-0.5 * mahal, kPowerFloor);
                    const double G = std::exp(power);
                    const double aG = alpha * G;
                    const bool saturated = aG > kAlphaCap;
                    const double aeff = saturated ? kAlphaCap : aG;
                    if (aeff < kAlphaCutoff) continue;
                    double s_amp = 0.0;  // dL/d(alpha_eff) shared across channels
                    for (int c = 0; c < ch; ++c) {
                        const size_t gi = static_cast<size_t>(g) * ch + c;
                        const double gr = grad_real.at(c, y, x);
                        const double gim = grad_imag.at(c, y, x);
                        const double common = f.cos_phi[gi] * gr + f.sin_phi[gi] * gim;
                        d_amp[c] += aeff * common;
                        d_phase[c] += f.amp[gi] * aeff * (-f.sin_phi[gi] * gr + f.cos_phi[gi] * gim);
                        s_amp += f.amp[gi] * common;
                    }
                    if (!saturated) {
                        d_alpha += s_amp * G;
                        // dL/d(mahal) through the surviving exp branch
                        const double w = s_amp * alpha * G * -0.5;
                        gmx += w * -2.0 * (dx * i00 + dy * i01);
                        gmy += w * -2.0 * (dx * i01 + dy * i11);
                        ga += w * dx * dx;
                        gb += 2.0 * w * dx * dy;
                        gc += w * dy * dy;
                    }
                }
            }
            for (int c = 0; c < ch; ++c) {
                const size_t gi = static_cast<size_t>(g) * ch + c;
                grads.amplitude[gi] = d_amp[c] * activate_amplitude_deriv(set.amplitude[gi]);
                grads.phase[gi] = d_phase[c];
            }
            grads.pre_opacity[g] = d_alpha * activate_opacity_deriv(set.pre_opacity[g]);
            grads.pre_position[2 * g] = gmx * activate_position_deriv(set.pre_position[2 * g], width);
            grads.pre_position[2 * g + 1] =
                gmy * activate_position_deriv(set.pre_position[2 * g + 1], height);

            // Chain from inverse-covariance gradients back to Sigma entries:
            // inv = adj(Sigma) / det_safe, det_safe = max(det, eps_d).
            const double c00 = f.cov00[g], c01 = f.cov01[g], c11 = f.cov11[g];
            const double det = c00 * c11 - c01 * c01;
            const double dsafe = std::max(det, kEpsDet);
            const double t_adj = ga * c11 - gb * c01 + gc * c00;
            const double clamped = det > kEpsDet ? 1.0 : 0.0;
            const double d2 = dsafe * dsafe;
            const double gS00 = gc / dsafe - t_adj * (clamped * c11) / d2;
            const double gS01 = -gb / dsafe - t_adj * (clamped * -2.0 * c01) / d2;
            const double gS11 = ga / dsafe - t_adj * (clamped * c00) / d2;

            const double th = set.rotation[g];
            const double ct = std::cos(th), st = std::sin(th);
            const double sx = f.sx[g], sy = f.sy[g];
            const double dsx = 2.0 * sx * (ct * ct * gS00 + ct * st * gS01 + st * st * gS11);
            const double dsy = 2.0 * sy * (st * st * gS00 - ct * st * gS01 + ct * ct * gS11);
            grads.pre_scale[2 * g] = dsx * activate_scale_deriv(set.pre_scale[2 * g]);
            grads.pre_scale[2 * g + 1] = dsy * activate_scale_deriv(set.pre_scale[2 * g + 1]);
            grads.rotation[g] = 2.0 * (sy * sy - sx * sx) * ct * st * gS00 +
                                (sx * sx - sy * sy) * (ct * ct - st * st) * gS01 +
                                2.0 * (sx * sx - sy * sy) * ct * st * gS11;
        }
    });
    return grads;
}

}  // namespace holo
