#include "holo/propagation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>

namespace holo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::mutex g_plan_mutex;
std::map<std::array<int, 3>, fftw_plan> g_plans;

fftw_plan get_plan(int ny, int nx, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    const std::array<int, 3> key = {ny, nx, sign};
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    std::vector<std::complex<double>> scratch(static_cast<size_t>(ny) * nx);
    fftw_plan plan =
        fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(scratch.data()),
                         reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    g_plans.emplace(key, plan);
    return plan;
}

void fft2_inplace(std::complex<double>* data, int ny, int nx, int sign) {
    fftw_plan plan = get_plan(ny, nx, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

// Signed frequency index for wrapped (DC-first) FFT layout; the centered
// layout index i corresponds to m = i - n/2.
inline int wrapped_freq_index(int k, int n) { return k < n - n / 2 ? k : k - n; }

struct BandLimit {
    double k = 0.0;       // wave number 2*pi/lambda
    double fx_max = 0.0;  // cycles/meter
    double fy_max = 0.0;
    double inv_lx = 0.0;  // 1/(nx*pitch)
    double inv_ly = 0.0;
};

BandLimit make_band_limit(const PropagationSpec& spec, double mask_distance, int channel,
                          int padded_nx, int padded_ny) {
    if (channel < 0 || channel >= static_cast<int>(spec.wavelengths.size()))
        throw std::invalid_argument("propagation: channel has no wavelength");
    const double lambda = spec.wavelengths[channel];
    if (lambda <= 0.0 || spec.pixel_pitch <= 0.0)
        throw std::invalid_argument("propagation: non-positive wavelength or pitch");
    BandLimit b;
    b.k = kTwoPi / lambda;
    const double lx = padded_nx * spec.pixel_pitch;
    const double ly = padded_ny * spec.pixel_pitch;
    b.inv_lx = 1.0 / lx;
    b.inv_ly = 1.0 / ly;
    b.fx_max = 1.0 / (lambda * std::sqrt((2.0 * mask_distance / lx) * (2.0 * mask_distance / lx) + 1.0));
    b.fy_max = 1.0 / (lambda * std::sqrt((2.0 * mask_distance / ly) * (2.0 * mask_distance / ly) + 1.0));
    return b;
}

inline double kz_of(const BandLimit& b, double fx, double fy) {
    const double kz2 = b.k * b.k - kTwoPi * kTwoPi * (fx * fx + fy * fy);
    return kz2 > 0.0 ? std::sqrt(kz2) : 0.0;
}

// Multiplies the wrapped-layout spectrum by the band-limited transfer function
// e^{j kz * phase_distance} and applies the circular aperture mask.
void apply_transfer(std::complex<double>* spec_data, int ny, int nx, const BandLimit& b,
                    double phase_distance, double aperture_radius) {
    for (int iy = 0; iy < ny; ++iy) {
        const int my = wrapped_freq_index(iy, ny);
        const double fy = my * b.inv_ly;
        const bool fy_ok = std::abs(fy) < b.fy_max;
        std::complex<double>* row = spec_data + static_cast<size_t>(iy) * nx;
        for (int ix = 0; ix < nx; ++ix) {
            const int mx = wrapped_freq_index(ix, nx);
            const double fx = mx * b.inv_lx;
            if (!fy_ok || std::abs(fx) >= b.fx_max) {
                row[ix] = 0.0;
                continue;
            }
            const double kz = kz_of(b, fx, fy);
            const double ph = kz * phase_distance;
            row[ix] *= std::complex<double>(std::cos(ph), std::sin(ph));
        }
    }
    if (aperture_radius > 0.0) {
        const double a2 = aperture_radius * aperture_radius;
        for (int iy = 0; iy < ny; ++iy) {
            const double dy = wrapped_freq_index(iy, ny) + 0.5;
            std::complex<double>* row = spec_data + static_cast<size_t>(iy) * nx;
            for (int ix = 0; ix < nx; ++ix) {
                const double dx = wrapped_freq_index(ix, nx) + 0.5;
                if (dx * dx + dy * dy >= a2) row[ix] = 0.0;
            }
        }
    }
}

void pad_center(const ComplexField& f, int c, std::complex<double>* buf, int py, int px) {
    std::fill(buf, buf + static_cast<size_t>(py) * px, std::complex<double>(0.0, 0.0));
    const int oy = (py - f.height) / 2, ox = (px - f.width) / 2;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            buf[static_cast<size_t>(y + oy) * px + (x + ox)] = {f.re(c, y, x), f.im(c, y, x)};
}

void crop_center(const std::complex<double>* buf, int py, int px, ComplexField& out, int c) {
    const int oy = (py - out.height) / 2, ox = (px - out.width) / 2;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const std::complex<double> v = buf[static_cast<size_t>(y + oy) * px + (x + ox)];
            out.re(c, y, x) = v.real();
            out.im(c, y, x) = v.imag();
        }
}

void check_spec(const ComplexField& field, const PropagationSpec& spec) {
    if (field.channels != static_cast<int>(spec.wavelengths.size()))
        throw std::invalid_argument("propagation: channel count does not match wavelengths");
    if (spec.pad_factor < 1) throw std::invalid_argument("propagation: pad_factor must be >= 1");
}

ComplexField propagate_impl(const ComplexField& field, const PropagationSpec& spec,
                            double phase_distance, double mask_distance) {
    check_spec(field, spec);
    const int px = field.width * spec.pad_factor;
    const int py = field.height * spec.pad_factor;
    ComplexField out(field.channels, field.height, field.width);
    std::vector<std::complex<double>> buf(static_cast<size_t>(py) * px);
    for (int c = 0; c < field.channels; ++c) {
        const BandLimit b = make_band_limit(spec, mask_distance, c, px, py);
        pad_center(field, c, buf.data(), py, px);
        fft2_inplace(buf.data(), py, px, FFTW_FORWARD);
        apply_transfer(buf.data(), py, px, b, phase_distance, spec.aperture_radius);
        fft2_inplace(buf.data(), py, px, FFTW_BACKWARD);
        const double scale = 1.0 / (static_cast<double>(px) * py);
        for (auto& v : buf) v *= scale;
        crop_center(buf.data(), py, px, out, c);
    }
    return out;
}

}  // namespace

std::vector<TransferFunctionSample> transfer_function(const PropagationSpec& spec, double distance,
                                                      int channel, int padded_nx, int padded_ny) {
    if (padded_nx <= 0 || padded_ny <= 0)
        throw std::invalid_argument("transfer_function: non-positive dims");
    const BandLimit b = make_band_limit(spec, distance, channel, padded_nx, padded_ny);
    std::vector<TransferFunctionSample> grid(static_cast<size_t>(padded_nx) * padded_ny);
    for (int iy = 0; iy < padded_ny; ++iy)
        for (int ix = 0; ix < padded_nx; ++ix) {
            TransferFunctionSample& s = grid[static_cast<size_t>(iy) * padded_nx + ix];
            s.fx = (ix - padded_nx / 2) * b.inv_lx;
            s.fy = (iy - padded_ny / 2) * b.inv_ly;
            s.kz = kz_of(b, s.fx, s.fy);
            s.inside_bandlimit = std::abs(s.fx) < b.fx_max && std::abs(s.fy) < b.fy_max;
        }
    return grid;
}

ComplexField propagate(const ComplexField& field, const PropagationSpec& spec, double distance) {
    if (!std::isfinite(distance)) throw std::invalid_argument("propagate: non-finite distance");
    return propagate_impl(field, spec, distance, distance);
}

ComplexField propagate_with_mask_distance(const ComplexField& field, const PropagationSpec& spec,
                                          double distance, double mask_distance) {
    return propagate_impl(field, spec, distance, mask_distance);
}

ComplexField propagate_backward(const ComplexField& grad_out, const PropagationSpec& spec,
                                double distance) {
    return propagate_impl(grad_out, spec, -distance, distance);
}

std::vector<ComplexField> propagate_multi(const ComplexField& field, const PropagationSpec& spec,
                                          const std::vector<double>& distances) {
    check_spec(field, spec);
    const int px = field.width * spec.pad_factor;
    const int py = field.height * spec.pad_factor;
    std::vector<ComplexField> out(distances.size(),
                                  ComplexField(field.channels, field.height, field.width));
    std::vector<std::complex<double>> freq(static_cast<size_t>(py) * px);
    std::vector<std::complex<double>> work(freq.size());
    const double scale = 1.0 / (static_cast<double>(px) * py);
    for (int c = 0; c < field.channels; ++c) {
        pad_center(field, c, freq.data(), py, px);
        fft2_inplace(freq.data(), py, px, FFTW_FORWARD);
        for (size_t l = 0; l < distances.size(); ++l) {
            const BandLimit b = make_band_limit(spec, distances[l], c, px, py);
            std::copy(freq.begin(), freq.end(), work.begin());
            apply_transfer(work.data(), py, px, b, distances[l], spec.aperture_radius);
            fft2_inplace(work.data(), py, px, FFTW_BACKWARD);
            for (auto& v : work) v *= scale;
            crop_center(work.data(), py, px, out[l], c);
        }
    }
    return out;
}

ComplexField propagate_multi_backward(const std::vector<ComplexField>& grads,
                                      const PropagationSpec& spec,
                                      const std::vector<double>& distances) {
    if (grads.empty() || grads.size() != distances.size())
        throw std::invalid_argument("propagate_multi_backward: plane count mismatch");
    for (const auto& g : grads)
        if (!g.same_shape(grads[0]))
            throw std::invalid_argument("propagate_multi_backward: gradient shape mismatch");
    check_spec(grads[0], spec);
    const int px = grads[0].width * spec.pad_factor;
    const int py = grads[0].height * spec.pad_factor;
    ComplexField out(grads[0].channels, grads[0].height, grads[0].width);
    std::vector<std::complex<double>> acc(static_cast<size_t>(py) * px);
    std::vector<std::complex<double>> work(acc.size());
    const double scale = 1.0 / (static_cast<double>(px) * py);
    for (int c = 0; c < grads[0].channels; ++c) {
        std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
        for (size_t l = 0; l < grads.size(); ++l) {
            const BandLimit b = make_band_limit(spec, distances[l], c, px, py);
            pad_center(grads[l], c, work.data(), py, px);
            fft2_inplace(work.data(), py, px, FFTW_FORWARD);
            apply_transfer(work.data(), py, px, b, -distances[l], spec.aperture_radius);
            for (size_t i = 0; i < acc.size(); ++i) acc[i] += work[i];
        }
        fft2_inplace(acc.data(), py, px, FFTW_BACKWARD);
        for (auto& v : acc) v *= scale;
        crop_center(acc.data(), py, px, out, c);
    }
    return out;
}

}  // namespace holo
