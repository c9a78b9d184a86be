#include "holo/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace holo {

namespace {

void check_pair(const std::vector<RealField>& recon, const TargetStack& target) {
    if (recon.empty()) throw std::invalid_argument("loss: no reconstruction planes");
    if (recon.size() != target.masks.size())
        throw std::invalid_argument("loss: plane count does not match masks");
    for (const auto& r : recon)
        if (!r.same_shape(target.intensity))
            throw std::invalid_argument("loss: reconstruction shape mismatch");
}

std::vector<double> ssim_window() {
    std::vector<double> g(kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Valid correlation along x: out is h x (w - win + 1).
void corr_x(const double* in, int h, int w, const std::vector<double>& g, double* out) {
    const int vw = w - static_cast<int>(g.size()) + 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            double s = 0.0;
            for (size_t j = 0; j < g.size(); ++j) s += g[j] * in[static_cast<size_t>(y) * w + x + j];
            out[static_cast<size_t>(y) * vw + x] = s;
        }
}

// Valid correlation along y: out is (h - win + 1) x w.
void corr_y(const double* in, int h, int w, const std::vector<double>& g, double* out) {
    const int vh = h - static_cast<int>(g.size()) + 1;
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (size_t i = 0; i < g.size(); ++i) s += g[i] * in[(static_cast<size_t>(y) + i) * w + x];
            out[static_cast<size_t>(y) * w + x] = s;
        }
}

// in: h x w image plane, out: valid (h-10) x (w-10) windowed means.
void window_mean(const double* in, int h, int w, const std::vector<double>& g,
                 std::vector<double>& tmp, double* out) {
    const int vw = w - static_cast<int>(g.size()) + 1;
    tmp.resize(static_cast<size_t>(h) * vw);
    corr_x(in, h, w, g, tmp.data());
    corr_y(tmp.data(), h, vw, g, out);
}

// Transpose of the valid correlation: spreads a valid-grid map back onto the
// full image grid. out must be pre-zeroed h x w.
void spread_t(const double* valid, int vh, int vw, int h, int w, const std::vector<double>& g,
              std::vector<double>& tmp, double* out) {
    // vertical transpose: tmp is h x vw
    tmp.assign(static_cast<size_t>(h) * vw, 0.0);
    for (int y = 0; y < vh; ++y)
        for (size_t i = 0; i < g.size(); ++i) {
            const double gv = g[i];
            double* dst = tmp.data() + (static_cast<size_t>(y) + i) * vw;
            const double* src = valid + static_cast<size_t>(y) * vw;
            for (int x = 0; x < vw; ++x) dst[x] += gv * src[x];
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            const double v = tmp[static_cast<size_t>(y) * vw + x];
            double* dst = out + static_cast<size_t>(y) * w + x;
            for (size_t j = 0; j < g.size(); ++j) dst[j] += g[j] * v;
        }
}

struct SsimPlane {
    double sum = 0.0;  // sum of SSIM map values
    size_t count = 0;
};

// Per-channel-plane SSIM; when grad != nullptr accumulates d(sum of map)/dx.
SsimPlane ssim_channel(const double* x, const double* y, int h, int w,
                       const std::vector<double>& g, double* grad) {
    if (h < kSsimWindow || w < kSsimWindow)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");
    const int vh = h - kSsimWindow + 1, vw = w - kSsimWindow + 1;
    const size_t n = static_cast<size_t>(h) * w, vn = static_cast<size_t>(vh) * vw;
    std::vector<double> tmp, xx(n), yy(n), xy(n);
    for (size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    std::vector<double> mu1(vn), mu2(vn), exx(vn), eyy(vn), exy(vn);
    window_mean(x, h, w, g, tmp, mu1.data());
    window_mean(y, h, w, g, tmp, mu2.data());
    window_mean(xx.data(), h, w, g, tmp, exx.data());
    window_mean(yy.data(), h, w, g, tmp, eyy.data());
    window_mean(xy.data(), h, w, g, tmp, exy.data());

    SsimPlane out;
    out.count = vn;
    std::vector<double> g1, g2, g3;
    if (grad) {
        g1.resize(vn);
        g2.resize(vn);
        g3.resize(vn);
    }
    for (size_t i = 0; i < vn; ++i) {
        const double m1 = mu1[i], m2 = mu2[i];
        const double s12 = exy[i] - m1 * m2;
        const double s11 = exx[i] - m1 * m1;
        const double s22 = eyy[i] - m2 * m2;
        const double a1 = 2.0 * m1 * m2 + kSsimC1;
        const double a2 = 2.0 * s12 + kSsimC2;
        const double b1 = m1 * m1 + m2 * m2 + kSsimC1;
        const double b2 = s11 + s22 + kSsimC2;
        const double s = (a1 * a2) / (b1 * b2);
        out.sum += s;
        if (grad) {
            // Treat s as a function of (mu1, E[x^2], E[xy]) with E[y^2] fixed.
            g1[i] = (s / a1) * 2.0 * m2 - (s / b1) * 2.0 * m1 + (s / b2) * 2.0 * m1 -
                    (s / a2) * 2.0 * m2;
            g2[i] = -s / b2;
            g3[i] = 2.0 * s / a2;
        }
    }
    if (grad) {
        std::vector<double> sp1(n, 0.0), sp2(n, 0.0), sp3(n, 0.0);
        spread_t(g1.data(), vh, vw, h, w, g, tmp, sp1.data());
        spread_t(g2.data(), vh, vw, h, w, g, tmp, sp2.data());
        spread_t(g3.data(), vh, vw, h, w, g, tmp, sp3.data());
        for (size_t i = 0; i < n; ++i) grad[i] += sp1[i] + 2.0 * x[i] * sp2[i] + y[i] * sp3[i];
    }
    return out;
}

void init_grads(const std::vector<RealField>& recon, std::vector<RealField>& grads) {
    grads.assign(recon.size(),
                 RealField(recon[0].channels, recon[0].height, recon[0].width));
}

}  // namespace

DepthPlaneSet make_depth_planes(int count, double center_distance, double spacing) {
    if (count < 1) throw std::invalid_argument("make_depth_planes: count must be >= 1");
    DepthPlaneSet p;
    p.count = count;
    p.center_distance = center_distance;
    p.spacing = spacing;
    p.distances.resize(count);
    for (int l = 0; l < count; ++l)
        p.distances[l] = center_distance + (l - (count - 1) * 0.5) * spacing;
    return p;
}

MaskStack build_masks(const RealField& depth, int plane_count, bool near_is_high) {
    if (plane_count < 1) throw std::invalid_argument("build_masks: plane count must be >= 1");
    const size_t n = static_cast<size_t>(depth.height) * depth.width;
    if (depth.channels != 1 || depth.values.size() != n)
        throw std::invalid_argument("build_masks: depth must be a single plane");
    MaskStack masks(plane_count, std::vector<uint8_t>(n, 0));
    for (size_t i = 0; i < n; ++i) {
        const double d = depth.values[i];
        int bin = static_cast<int>(std::floor(d * plane_count));
        bin = std::clamp(bin, 0, plane_count - 1);
        const int plane = near_is_high ? plane_count - 1 - bin : bin;
        masks[plane][i] = 1;
    }
    return masks;
}

TargetStack make_target_stack(const RealField& intensity, const RealField& depth, int plane_count,
                              bool near_is_high) {
    if (depth.height != intensity.height || depth.width != intensity.width)
        throw std::invalid_argument("make_target_stack: depth/intensity size mismatch");
    TargetStack t;
    t.intensity = intensity;
    t.depth = depth;
    t.masks = build_masks(depth, plane_count, near_is_high);
    return t;
}

double loss_mse(const std::vector<RealField>& recon, const TargetStack& target) {
    check_pair(recon, target);
    const size_t n = target.intensity.values.size();
    double total = 0.0;
    for (const auto& r : recon) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double d = r.values[i] - target.intensity.values[i];
            s += d * d;
        }
        total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(recon.size());
}

double loss_mse_grad(const std::vector<RealField>& recon, const TargetStack& target,
                     std::vector<RealField>& grads) {
    check_pair(recon, target);
    init_grads(recon, grads);
    const size_t n = target.intensity.values.size();
    const double w = 2.0 / (static_cast<double>(n) * recon.size());
    double total = 0.0;
    for (size_t l = 0; l < recon.size(); ++l) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double d = recon[l].values[i] - target.intensity.values[i];
            s += d * d;
            grads[l].values[i] = w * d;
        }
        total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(recon.size());
}

double loss_recon(const std::vector<RealField>& recon, const TargetStack& target) {
    check_pair(recon, target);
    const int ch = target.intensity.channels;
    const size_t plane = static_cast<size_t>(target.intensity.height) * target.intensity.width;
    const size_t n = target.intensity.values.size();
    double total = 0.0;
    for (size_t l = 0; l < recon.size(); ++l) {
        const auto& mask = target.masks[l];
        double s = 0.0;
        for (int c = 0; c < ch; ++c)
            for (size_t i = 0; i < plane; ++i) {
                const size_t idx = c * plane + i;
                const double t = target.intensity.values[idx];
                const double d = recon[l].values[idx] - t;
                s += d * d * (1.0 + (mask[i] ? 1.0 : 0.0) + t * t);
            }
        total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(recon.size());
}

double loss_recon_grad(const std::vector<RealField>& recon, const TargetStack& target,
                       std::vector<RealField>& grads) {
    check_pair(recon, target);
    init_grads(recon, grads);
    const int ch = target.intensity.channels;
    const size_t plane = static_cast<size_t>(target.intensity.height) * target.intensity.width;
    const size_t n = target.intensity.values.size();
    const double w = 2.0 / (static_cast<double>(n) * recon.size());
    double total = 0.0;
    for (size_t l = 0; l < recon.size(); ++l) {
        const auto& mask = target.masks[l];
        double s = 0.0;
        for (int c = 0; c < ch; ++c)
            for (size_t i = 0; i < plane; ++i) {
                const size_t idx = c * plane + i;
                const double t = target.intensity.values[idx];
                const double d = recon[l].values[idx] - t;
                const double k = 1.0 + (mask[i] ? 1.0 : 0.0) + t * t;
                s += d * d * k;
                grads[l].values[idx] = w * d * k;
            }
        total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(recon.size());
}

double loss_ssim(const std::vector<RealField>& recon, const TargetStack& target) {
    check_pair(recon, target);
    const auto g = ssim_window();
    const int h = target.intensity.height, w = target.intensity.width;
    const size_t plane = static_cast<size_t>(h) * w;
    double sum = 0.0;
    size_t count = 0;
    for (const auto& r : recon)
        for (int c = 0; c < r.channels; ++c) {
            const SsimPlane p = ssim_channel(r.values.data() + c * plane,
                                             target.intensity.values.data() + c * plane, h, w, g,
                                             nullptr);
            sum += p.sum;
            count += p.count;
        }
    return 1.0 - sum / static_cast<double>(count);
}

double loss_ssim_grad(const std::vector<RealField>& recon, const TargetStack& target,
                      std::vector<RealField>& grads) {
    check_pair(recon, target);
    init_grads(recon, grads);
    const auto g = ssim_window();
    const int h = target.intensity.height, w = target.intensity.width;
    const size_t plane = static_cast<size_t>(h) * w;
    double sum = 0.0;
    size_t count = 0;
    for (size_t l = 0; l < recon.size(); ++l)
        for (int c = 0; c < recon[l].channels; ++c) {
            const SsimPlane p =
                ssim_channel(recon[l].values.data() + c * plane,
                             target.intensity.values.data() + c * plane, h, w, g,
                             grads[l].values.data() + c * plane);
            sum += p.sum;
            count += p.count;
        }
    const double scale = -1.0 / static_cast<double>(count);
    for (auto& gr : grads)
        for (double& v : gr.values) v *= scale;
    return 1.0 - sum / static_cast<double>(count);
}

double training_loss(const std::vector<RealField>& recon, const TargetStack& target) {
    return loss_recon(recon, target) + kSsimWeight * loss_ssim(recon, target);
}

double training_loss_grad(const std::vector<RealField>& recon, const TargetStack& target,
                          std::vector<RealField>& grads) {
    std::vector<RealField> ssim_grads;
    const double lr = loss_recon_grad(recon, target, grads);
    const double ls = loss_ssim_grad(recon, target, ssim_grads);
    for (size_t l = 0; l < grads.size(); ++l)
        for (size_t i = 0; i < grads[l].values.size(); ++i)
            grads[l].values[i] += kSsimWeight * ssim_grads[l].values[i];
    return lr + kSsimWeight * ls;
}

double plane_recon_loss(const RealField& recon, const TargetStack& target, size_t plane,
                        RealField* grad) {
    if (!recon.same_shape(target.intensity))
        throw std::invalid_argument("plane_recon_loss: shape mismatch");
    if (plane >= target.masks.size())
        throw std::invalid_argument("plane_recon_loss: plane out of range");
    const auto& mask = target.masks[plane];
    const int ch = target.intensity.channels;
    const size_t px = static_cast<size_t>(target.intensity.height) * target.intensity.width;
    const size_t n = target.intensity.values.size();
    const double w = 2.0 / static_cast<double>(n);
    if (grad) *grad = RealField(recon.channels, recon.height, recon.width);
    double s = 0.0;
    for (int c = 0; c < ch; ++c)
        for (size_t i = 0; i < px; ++i) {
            const size_t idx = c * px + i;
            const double t = target.intensity.values[idx];
            const double d = recon.values[idx] - t;
            const double k = 1.0 + (mask[i] ? 1.0 : 0.0) + t * t;
            s += d * d * k;
            if (grad) grad->values[idx] = w * d * k;
        }
    return s / static_cast<double>(n);
}

double ssim_value(const RealField& a, const RealField& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim_value: shape mismatch");
    const auto g = ssim_window();
    const size_t plane = static_cast<size_t>(a.height) * a.width;
    double sum = 0.0;
    size_t count = 0;
    for (int c = 0; c < a.channels; ++c) {
        const SsimPlane p = ssim_channel(a.values.data() + c * plane, b.values.data() + c * plane,
                                         a.height, a.width, g, nullptr);
        sum += p.sum;
        count += p.count;
    }
    return sum / static_cast<double>(count);
}

}  // namespace holo
