#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace holo {

struct AdanConfig {
    double beta1 = 0.98;
    double beta2 = 0.92;
    double beta3 = 0.99;
    double eps = 1e-8;
};

// lr_min + 0.5*(lr_max - lr_min)*(1 + cos(pi*step/total)); nonincreasing.
double cosine_lr(int step, int total_steps, double lr_max, double lr_min);

// Adan with per-group state (first/second/gradient-difference moments with
// bias correction). Groups are independent; stepping a group advances only
// its own counter.
class Adan {
  public:
    explicit Adan(AdanConfig cfg = {});

    // Registers a parameter group; lr can be changed later via set_lr.
    void add_group(const std::string& name, size_t size, double lr);
    void set_lr(const std::string& name, double lr);
    double lr(const std::string& name) const;
    int step_count(const std::string& name) const;

    // In-place parameter update. Throws on a non-finite gradient, naming the
    // group.
    void step(const std::string& name, std::span<double> params, std::span<const double> grads);

  private:
    struct Group {
        std::string name;
        double lr = 0.0;
        int t = 0;
        std::vector<double> m, v, n, g_prev;
    };
    Group& find(const std::string& name);
    const Group& find(const std::string& name) const;

    AdanConfig cfg_;
    std::vector<Group> groups_;
};

}  // namespace holo
