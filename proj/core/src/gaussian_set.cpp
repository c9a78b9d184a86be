#include "holo/gaussian_set.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace holo {

GaussianSet::GaussianSet(int n, int c)
    : count(n), channels(c),
      pre_position(2 * static_cast<size_t>(n), 0.0),
      pre_scale(2 * static_cast<size_t>(n), 0.0),
      rotation(static_cast<size_t>(n), 0.0),
      amplitude(static_cast<size_t>(n) * c, 0.0),
      phase(static_cast<size_t>(n) * c, 0.0),
      pre_opacity(static_cast<size_t>(n), 0.0) {
    if (n < 0 || c <= 0) throw std::invalid_argument("GaussianSet: invalid N or C");
}

namespace {
void check_array(const std::vector<double>& v, size_t expect, const char* name) {
    if (v.size() != expect)
        throw std::invalid_argument(std::string("GaussianSet: bad size for ") + name);
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string("GaussianSet: non-finite entry in ") + name);
}
}  // namespace

void GaussianSet::validate() const {
    if (count < 0 || channels <= 0) throw std::invalid_argument("GaussianSet: invalid N or C");
    const size_t n = static_cast<size_t>(count);
    check_array(pre_position, 2 * n, "pre_position");
    check_array(pre_scale, 2 * n, "pre_scale");
    check_array(rotation, n, "rotation");
    check_array(amplitude, n * channels, "amplitude");
    check_array(phase, n * channels, "phase");
    check_array(pre_opacity, n, "pre_opacity");
}

GaussianSet GaussianSet::concat(const GaussianSet& a, const GaussianSet& b) {
    if (a.channels != b.channels) throw std::invalid_argument("GaussianSet::concat: channel mismatch");
    GaussianSet out(a.count + b.count, a.channels);
    auto join = [](std::vector<double>& dst, const std::vector<double>& x, const std::vector<double>& y) {
        dst = x;
        dst.insert(dst.end(), y.begin(), y.end());
    };
    join(out.pre_position, a.pre_position, b.pre_position);
    join(out.pre_scale, a.pre_scale, b.pre_scale);
    join(out.rotation, a.rotation, b.rotation);
    join(out.amplitude, a.amplitude, b.amplitude);
    join(out.phase, a.phase, b.phase);
    join(out.pre_opacity, a.pre_opacity, b.pre_opacity);
    return out;
}

}  // namespace holo
