#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "holo/loss.hpp"
#include "holo/oracles.hpp"
#include "test_util.hpp"

using namespace holo;

namespace {

TargetStack random_target(uint64_t seed, int channels, int height, int width, int planes) {
    const RealField img = testutil::random_real(seed, channels, height, width, 0.0, 1.0);
    const RealField depth = testutil::random_real(seed + 1000, 1, height, width, 0.0, 1.0);
    return make_target_stack(img, depth, planes, true);
}

std::vector<RealField> random_stack(uint64_t seed, int channels, int height, int width,
                                    int planes) {
    std::vector<RealField> r;
    for (int l = 0; l < planes; ++l)
        r.push_back(testutil::random_real(seed + l, channels, height, width, 0.0, 1.0));
    return r;
}

}  // namespace

TEST_CASE("depth planes are centered on the focal distance") {
    const DepthPlaneSet two = make_depth_planes(2, 3e-3, 2e-3);
    REQUIRE(two.distances.size() == 2);
    CHECK(two.distances[0] == doctest::Approx(2e-3));
    CHECK(two.distances[1] == doctest::Approx(4e-3));
    const DepthPlaneSet one = make_depth_planes(1, 3e-3, 2e-3);
    CHECK(one.distances[0] == doctest::Approx(3e-3));
    const DepthPlaneSet three = make_depth_planes(3, 3e-3, 2e-3);
    CHECK(three.distances[0] == doctest::Approx(1e-3));
    CHECK(three.distances[1] == doctest::Approx(3e-3));
    CHECK(three.distances[2] == doctest::Approx(5e-3));
    CHECK_THROWS(make_depth_planes(0, 1e-3, 1e-3));
}

TEST_CASE("masks quantize depth and partition the pixels") {
    RealField depth(1, 2, 3);
    depth.values = {0.0, 0.2, 0.45, 0.55, 0.9, 1.0};
    const MaskStack near_high = build_masks(depth, 2, true);
    // depth >= 0.5 -> bin 1 -> plane 0 (nearest) under near_is_high
    CHECK(near_high[0] == std::vector<uint8_t>({0, 0, 0, 1, 1, 1}));
    CHECK(near_high[1] == std::vector<uint8_t>({1, 1, 1, 0, 0, 0}));
    const MaskStack near_low = build_masks(depth, 2, false);
    CHECK(near_low[0] == std::vector<uint8_t>({1, 1, 1, 0, 0, 0}));

    const RealField d4 = testutil::random_real(3, 1, 8, 8, 0.0, 1.0);
    const MaskStack m4 = build_masks(d4, 4, true);
    for (size_t i = 0; i < d4.values.size(); ++i) {
        int sum = 0;
        for (const auto& m : m4) sum += m[i];
        CHECK(sum == 1);
    }
    CHECK_THROWS(build_masks(testutil::random_real(1, 3, 4, 4, 0.0, 1.0), 2, true));
}

TEST_CASE("all losses vanish on identical stacks") {
    const TargetStack target = random_target(5, 1, 24, 20, 2);
    std::vector<RealField> recon = {target.intensity, target.intensity};
    CHECK(loss_mse(recon, target) == 0.0);
    CHECK(loss_recon(recon, target) == 0.0);
    CHECK(loss_ssim(recon, target) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(training_loss(recon, target) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ssim_value(target.intensity, target.intensity) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("losses match the scalar loop oracles") {
    for (int channels : {1, 3}) {
        const TargetStack target = random_target(7 + channels, channels, 32, 48, 2);
        const std::vector<RealField> recon = random_stack(50 + channels, channels, 32, 48, 2);
        CHECK(std::abs(loss_mse(recon, target) - oracle::loop_mse(recon, target)) <= 1e-10);
        CHECK(std::abs(loss_recon(recon, target) - oracle::loop_recon(recon, target)) <= 1e-10);
        CHECK(std::abs(loss_ssim(recon, target) - oracle::loop_ssim(recon, target)) <= 1e-6);
    }
}

TEST_CASE("training loss combines the reconstruction and ssim terms") {
    const TargetStack target = random_target(9, 1, 20, 24, 2);
    const std::vector<RealField> recon = random_stack(60, 1, 20, 24, 2);
    CHECK(training_loss(recon, target) ==
          doctest::Approx(loss_recon(recon, target) + kSsimWeight * loss_ssim(recon, target))
              .epsilon(1e-14));
}

TEST_CASE("per-plane reconstruction penalty matches a naive loop") {
    const TargetStack target = random_target(11, 2, 12, 10, 2);
    const RealField recon = testutil::random_real(70, 2, 12, 10, 0.0, 1.0);
    for (size_t plane = 0; plane < 2; ++plane) {
        double expect = 0.0;
        const size_t px = 12 * 10;
        for (int c = 0; c < 2; ++c)
            for (size_t i = 0; i < px; ++i) {
                const double t = target.intensity.values[c * px + i];
                const double d = recon.values[c * px + i] - t;
                expect += d * d * (1.0 + (target.masks[plane][i] ? 1.0 : 0.0) + t * t);
            }
        expect /= static_cast<double>(2 * px);
        CHECK(plane_recon_loss(recon, target, plane) == doctest::Approx(expect).epsilon(1e-12));
    }
}

namespace {

// Finite differences through a loss over the concatenated plane values.
void check_loss_grad(
    const std::function<double(const std::vector<RealField>&, const TargetStack&,
                               std::vector<RealField>&)>& fn,
    const TargetStack& target, std::vector<RealField> recon, double tol) {
    std::vector<RealField> analytic;
    fn(recon, target, analytic);
    const size_t per_plane = recon[0].values.size();
    std::vector<double> x;
    for (const auto& r : recon) x.insert(x.end(), r.values.begin(), r.values.end());
    auto value = [&](const std::vector<double>& v) {
        std::vector<RealField> stack = recon;
        for (size_t l = 0; l < stack.size(); ++l)
            std::copy(v.begin() + l * per_plane, v.begin() + (l + 1) * per_plane,
                      stack[l].values.begin());
        std::vector<RealField> unused;
        return fn(stack, target, unused);
    };
    const std::vector<double> fd = oracle::finite_diff_grad(value, x);
    double max_rel = 0.0;
    for (size_t l = 0, i = 0; l < recon.size(); ++l)
        for (size_t j = 0; j < per_plane; ++j, ++i) {
            const double a = analytic[l].values[j];
            // denominator floor 1e-6: near-zero coordinates compare FD
            // roundoff noise (~1e-12) against it, not against each other
            const double rel = std::abs(a - fd[i]) / std::max({std::abs(a), std::abs(fd[i]), 1e-6});
            max_rel = std::max(max_rel, rel);
        }
    CHECK(max_rel <= tol);
}

}  // namespace

TEST_CASE("analytic loss gradients match finite differences") {
    const TargetStack target = random_target(13, 1, 16, 16, 2);
    const std::vector<RealField> recon = random_stack(80, 1, 16, 16, 2);
    check_loss_grad(loss_mse_grad, target, recon, 1e-5);
    check_loss_grad(loss_recon_grad, target, recon, 1e-5);
    check_loss_grad(loss_ssim_grad, target, recon, 1e-5);
    check_loss_grad(training_loss_grad, target, recon, 1e-5);
    // gradient calls return the same value as the plain evaluations
    std::vector<RealField> g;
    CHECK(loss_mse_grad(recon, target, g) == doctest::Approx(loss_mse(recon, target)));
    CHECK(loss_ssim_grad(recon, target, g) ==
          doctest::Approx(loss_ssim(recon, target)).epsilon(1e-12));
}

TEST_CASE("per-plane penalty gradient matches finite differences") {
    const TargetStack target = random_target(15, 1, 14, 14, 2);
    RealField recon = testutil::random_real(90, 1, 14, 14, 0.0, 1.0);
    RealField analytic;
    plane_recon_loss(recon, target, 0, &analytic);
    auto value = [&](const std::vector<double>& v) {
        RealField r = recon;
        r.values = v;
        return plane_recon_loss(r, target, 0);
    };
    const std::vector<double> fd = oracle::finite_diff_grad(value, recon.values);
    for (size_t i = 0; i < fd.size(); ++i)
        CHECK(analytic.values[i] ==
              doctest::Approx(fd[i]).epsilon(1e-6).scale(std::max(1.0, std::abs(fd[i]))));
}

TEST_CASE("shape and plane mismatches are rejected") {
    const TargetStack target = random_target(17, 1, 16, 16, 2);
    std::vector<RealField> wrong_planes = random_stack(95, 1, 16, 16, 3);
    CHECK_THROWS(loss_mse(wrong_planes, target));
    std::vector<RealField> wrong_shape = random_stack(96, 1, 8, 16, 2);
    CHECK_THROWS(loss_recon(wrong_shape, target));
    const TargetStack tiny = random_target(18, 1, 8, 8, 1);
    std::vector<RealField> tiny_recon = random_stack(97, 1, 8, 8, 1);
    CHECK_THROWS(loss_ssim(tiny_recon, tiny));  // below the 11x11 window
    CHECK_THROWS(plane_recon_loss(tiny_recon[0], tiny, 5));
}
