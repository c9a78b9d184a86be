#include "holo/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace holo::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

// One explicit 1D DFT pass (sign -1 forward, +1 inverse, unscaled).
void dft_1d(const double* re_in, const double* im_in, int n, int stride, double sign,
            double* re_out, double* im_out) {
    for (int k = 0; k < n; ++k) {
        double sr = 0.0, si = 0.0;
        for (int m = 0; m < n; ++m) {
            const double ang = sign * 2.0 * kPi * k * m / n;
            const double cr = std::cos(ang), ci = std::sin(ang);
            const double r = re_in[static_cast<size_t>(m) * stride];
            const double i = im_in[static_cast<size_t>(m) * stride];
            sr += r * cr - i * ci;
            si += r * ci + i * cr;
        }
        re_out[static_cast<size_t>(k) * stride] = sr;
        im_out[static_cast<size_t>(k) * stride] = si;
    }
}

void dft_2d(std::vector<double>& re, std::vector<double>& im, int ny, int nx, double sign) {
    std::vector<double> tr(re.size()), ti(im.size());
    for (int y = 0; y < ny; ++y)
        dft_1d(re.data() + static_cast<size_t>(y) * nx, im.data() + static_cast<size_t>(y) * nx,
               nx, 1, sign, tr.data() + static_cast<size_t>(y) * nx,
               ti.data() + static_cast<size_t>(y) * nx);
    for (int x = 0; x < nx; ++x)
        dft_1d(tr.data() + x, ti.data() + x, ny, nx, sign, re.data() + x, im.data() + x);
}

int signed_bin(int k, int n) { return k < n - n / 2 ? k : k - n; }

}  // namespace

ComplexField brute_rasterize(const GaussianSet& set, int width, int height) {
    BruteCounters counters;
    return brute_rasterize_counted(set, width, height, counters);
}

ComplexField brute_rasterize_counted(const GaussianSet& set, int width, int height,
                                     BruteCounters& counters) {
    set.validate();
    ComplexField out(set.channels, height, width);
    counters = BruteCounters{};
    const int ch = set.channels;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int n = 0; n < set.count; ++n) {
                // inline activations, written out against the definitions
                const double cx = (std::tanh(set.pre_position[2 * n]) + 1.0) / 2.0 * width;
                const double cy = (std::tanh(set.pre_position[2 * n + 1]) + 1.0) / 2.0 * height;
                const double sx = std::exp(set.pre_scale[2 * n]) + 0.1;
                const double sy = std::exp(set.pre_scale[2 * n + 1]) + 0.1;
                const double alpha = 1.0 / (1.0 + std::exp(-set.pre_opacity[n]));
                const double th = set.rotation[n];
                const double rot[2][2] = {{std::cos(th), -std::sin(th)},
                                          {std::sin(th), std::cos(th)}};
                const double sq[2][2] = {{sx * sx, 0.0}, {0.0, sy * sy}};
                double rs[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        for (int k = 0; k < 2; ++k) rs[i][j] += rot[i][k] * sq[k][j];
                double cov[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        for (int k = 0; k < 2; ++k) cov[i][j] += rs[i][k] * rot[j][k];
                cov[0][0] += 0.1;
                cov[1][1] += 0.1;
                const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
                const double det_safe = det > 1e-10 ? det : 1e-10;
                const double inv[2][2] = {{cov[1][1] / det_safe, -cov[0][1] / det_safe},
                                          {-cov[1][0] / det_safe, cov[0][0] / det_safe}};
                const double dx = x - cx, dy = y - cy;
                const double mahal = dx * (inv[0][0] * dx + inv[0][1] * dy) +
                                     dy * (inv[1][0] * dx + inv[1][1] * dy);
                double power = -0.5 * mahal;
                if (power < -50.0) {
                    power = -50.0;
                    ++counters.floored;
                }
                const double ag = alpha * std::exp(power);
                double aeff = ag;
                if (aeff > 0.99) {
                    aeff = 0.99;
                    ++counters.saturated;
                }
                if (aeff < 1.0 / 255.0) {
                    ++counters.skipped;
                    continue;
                }
                for (int c = 0; c < ch; ++c) {
                    double amp = set.amplitude[static_cast<size_t>(n) * ch + c];
                    if (amp < 0.0) amp = 0.0;
                    if (amp > 1.0) amp = 1.0;
                    const double phi = set.phase[static_cast<size_t>(n) * ch + c];
                    out.re(c, y, x) += amp * aeff * std::cos(phi);
                    out.im(c, y, x) += amp * aeff * std::sin(phi);
                }
            }
    return out;
}

ComplexField direct_dft_propagate(const ComplexField& field, const PropagationSpec& spec,
                                  double distance) {
    if (field.width > 64 || field.height > 64)
        throw std::invalid_argument("direct_dft_propagate: dims capped at 64 per side");
    if (field.channels != static_cast<int>(spec.wavelengths.size()))
        throw std::invalid_argument("direct_dft_propagate: channel count mismatch");
    if (spec.pad_factor < 1)
        throw std::invalid_argument("direct_dft_propagate: pad_factor must be >= 1");
    const int w = field.width, h = field.height;
    const int pw = w * spec.pad_factor, ph = h * spec.pad_factor;
    const int ox = (pw - w) / 2, oy = (ph - h) / 2;
    ComplexField out(field.channels, h, w);
    for (int c = 0; c < field.channels; ++c) {
        const double lambda = spec.wavelengths[c];
        const double wave_k = 2.0 * kPi / lambda;
        const double lx = pw * spec.pixel_pitch, ly = ph * spec.pixel_pitch;
        const double fx_lim =
            1.0 / (lambda * std::sqrt((2.0 * distance / lx) * (2.0 * distance / lx) + 1.0));
        const double fy_lim =
            1.0 / (lambda * std::sqrt((2.0 * distance / ly) * (2.0 * distance / ly) + 1.0));

        std::vector<double> re(static_cast<size_t>(ph) * pw, 0.0), im(re.size(), 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                re[static_cast<size_t>(y + oy) * pw + (x + ox)] = field.re(c, y, x);
                im[static_cast<size_t>(y + oy) * pw + (x + ox)] = field.im(c, y, x);
            }
        dft_2d(re, im, ph, pw, -1.0);

        for (int ky = 0; ky < ph; ++ky) {
            const double fy = signed_bin(ky, ph) / ly;
            for (int kx = 0; kx < pw; ++kx) {
                const double fx = signed_bin(kx, pw) / lx;
                const size_t i = static_cast<size_t>(ky) * pw + kx;
                if (std::abs(fy) >= fy_lim || std::abs(fx) >= fx_lim) {
                    re[i] = 0.0;
                    im[i] = 0.0;
                    continue;
                }
                const double kz2 = wave_k * wave_k - (2.0 * kPi) * (2.0 * kPi) * (fx * fx + fy * fy);
                const double kz = kz2 > 0.0 ? std::sqrt(kz2) : 0.0;
                const double hr = std::cos(kz * distance), hi = std::sin(kz * distance);
                const double r = re[i], m = im[i];
                re[i] = r * hr - m * hi;
                im[i] = r * hi + m * hr;
            }
        }
        if (spec.aperture_radius > 0.0) {
            const double a2 = spec.aperture_radius * spec.aperture_radius;
            for (int ky = 0; ky < ph; ++ky) {
                const double dy = signed_bin(ky, ph) + 0.5;
                for (int kx = 0; kx < pw; ++kx) {
                    const double dx = signed_bin(kx, pw) + 0.5;
                    if (dx * dx + dy * dy >= a2) {
                        re[static_cast<size_t>(ky) * pw + kx] = 0.0;
                        im[static_cast<size_t>(ky) * pw + kx] = 0.0;
                    }
                }
            }
        }

        dft_2d(re, im, ph, pw, 1.0);
        const double scale = 1.0 / (static_cast<double>(pw) * ph);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                out.re(c, y, x) = re[static_cast<size_t>(y + oy) * pw + (x + ox)] * scale;
                out.im(c, y, x) = im[static_cast<size_t>(y + oy) * pw + (x + ox)] * scale;
            }
    }
    return out;
}

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, const FiniteDiffSpec& spec) {
    if (spec.h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + spec.h;
        const double fp = f(x);
        x[i] = saved - spec.h;
        const double fm = f(x);
        x[i] = saved;
        g[i] = (fp - fm) / (2.0 * spec.h);
    }
    return g;
}

double loop_mse(const std::vector<RealField>& recon, const TargetStack& target) {
    if (recon.empty()) throw std::invalid_argument("loop_mse: no planes");
    double total = 0.0;
    size_t count = 0;
    for (const auto& r : recon)
        for (size_t i = 0; i < r.values.size(); ++i) {
            const double d = r.values[i] - target.intensity.values[i];
            total += d * d;
            ++count;
        }
    return total / static_cast<double>(count);
}

double loop_recon(const std::vector<RealField>& recon, const TargetStack& target) {
    if (recon.empty()) throw std::invalid_argument("loop_recon: no planes");
    const size_t px = static_cast<size_t>(target.intensity.height) * target.intensity.width;
    double total = 0.0;
    size_t count = 0;
    for (size_t l = 0; l < recon.size(); ++l)
        for (int c = 0; c < recon[l].channels; ++c)
            for (size_t i = 0; i < px; ++i) {
                const double t = target.intensity.values[c * px + i];
                const double d = recon[l].values[c * px + i] - t;
                const double m = target.masks[l][i] ? 1.0 : 0.0;
                total += d * d * (1.0 + m + t * t);
                ++count;
            }
    return total / static_cast<double>(count);
}

double loop_ssim(const std::vector<RealField>& recon, const TargetStack& target) {
    if (recon.empty()) throw std::invalid_argument("loop_ssim: no planes");
    const int win = 11, half = win / 2;
    const double sigma = 1.5;
    double wsum = 0.0;
    double weight[11][11];
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double di = i - half, dj = j - half;
            weight[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            wsum += weight[i][j];
        }
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) weight[i][j] /= wsum;

    const int h = target.intensity.height, w = target.intensity.width;
    if (h < win || w < win) throw std::invalid_argument("loop_ssim: image smaller than window");
    const size_t px = static_cast<size_t>(h) * w;
    double total = 0.0;
    size_t count = 0;
    for (const auto& r : recon)
        for (int c = 0; c < r.channels; ++c) {
            const double* a = r.values.data() + c * px;
            const double* b = target.intensity.values.data() + c * px;
            for (int y = 0; y + win <= h; ++y)
                for (int x = 0; x + win <= w; ++x) {
                    double mu1 = 0.0, mu2 = 0.0;
                    for (int i = 0; i < win; ++i)
                        for (int j = 0; j < win; ++j) {
                            mu1 += weight[i][j] * a[static_cast<size_t>(y + i) * w + x + j];
                            mu2 += weight[i][j] * b[static_cast<size_t>(y + i) * w + x + j];
                        }
                    // centered moments, unlike the kernel's E[x^2] - mu^2 form
                    double v1 = 0.0, v2 = 0.0, cov = 0.0;
                    for (int i = 0; i < win; ++i)
                        for (int j = 0; j < win; ++j) {
                            const double da = a[static_cast<size_t>(y + i) * w + x + j] - mu1;
                            const double db = b[static_cast<size_t>(y + i) * w + x + j] - mu2;
                            v1 += weight[i][j] * da * da;
                            v2 += weight[i][j] * db * db;
                            cov += weight[i][j] * da * db;
                        }
                    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
                    total += ((2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)) /
                             ((mu1 * mu1 + mu2 * mu2 + c1) * (v1 + v2 + c2));
                    ++count;
                }
        }
    return 1.0 - total / static_cast<double>(count);
}

}  // namespace holo::oracle
