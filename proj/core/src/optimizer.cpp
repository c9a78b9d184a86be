#include "holo/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace holo {

double cosine_lr(int step, int total_steps, double lr_max, double lr_min) {
    if (total_steps <= 0 || step < 0 || step > total_steps)
        throw std::invalid_argument("cosine_lr: step outside [0, total_steps]");
    return lr_min + 0.5 * (lr_max - lr_min) *
                        (1.0 + std::cos(M_PI * static_cast<double>(step) / total_steps));
}

Adan::Adan(AdanConfig cfg) : cfg_(cfg) {}

void Adan::add_group(const std::string& name, size_t size, double lr) {
    for (const auto& g : groups_)
        if (g.name == name) throw std::invalid_argument("Adan: duplicate group " + name);
    Group g;
    g.name = name;
    g.lr = lr;
    g.m.assign(size, 0.0);
    g.v.assign(size, 0.0);
    g.n.assign(size, 0.0);
    g.g_prev.assign(size, 0.0);
    groups_.push_back(std::move(g));
}

Adan::Group& Adan::find(const std::string& name) {
    for (auto& g : groups_)
        if (g.name == name) return g;
    throw std::invalid_argument("Adan: unknown group " + name);
}

const Adan::Group& Adan::find(const std::string& name) const {
    for (const auto& g : groups_)
        if (g.name == name) return g;
    throw std::invalid_argument("Adan: unknown group " + name);
}

void Adan::set_lr(const std::string& name, double lr) { find(name).lr = lr; }

double Adan::lr(const std::string& name) const { return find(name).lr; }

int Adan::step_count(const std::string& name) const { return find(name).t; }

void Adan::step(const std::string& name, std::span<double> params, std::span<const double> grads) {
    Group& g = find(name);
    if (params.size() != g.m.size() || grads.size() != g.m.size())
        throw std::invalid_argument("Adan: size mismatch for group " + name);
    for (double gv : grads)
        if (!std::isfinite(gv))
            throw std::runtime_error("Adan: non-finite gradient in group " + name);
    g.t += 1;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2, b3 = cfg_.beta3;
    const double bc1 = 1.0 - std::pow(b1, g.t);
    const double bc2 = 1.0 - std::pow(b2, g.t);
    const double bc3 = 1.0 - std::pow(b3, g.t);
    const bool first = g.t == 1;
    for (size_t i = 0; i < params.size(); ++i) {
        const double gr = grads[i];
        const double diff = first ? 0.0 : gr - g.g_prev[i];
        g.m[i] = b1 * g.m[i] + (1.0 - b1) * gr;
        g.v[i] = b2 * g.v[i] + (1.0 - b2) * diff;
        const double upd = gr + b2 * diff;
        g.n[i] = b3 * g.n[i] + (1.0 - b3) * upd * upd;
        const double denom = std::sqrt(g.n[i] / bc3) + cfg_.eps;
        params[i] -= g.lr * (g.m[i] / bc1 + b2 * g.v[i] / bc2) / denom;
        g.g_prev[i] = gr;
    }
}

}  // namespace holo
