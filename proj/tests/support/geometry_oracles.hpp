#pragma once

// Independent reference implementations used only by tests. They deliberately
// avoid the library's closed-form geometry paths: overlap comes from counting
// raster cells, gradients from central finite differences on the public loss.

#include <array>
#include <cmath>
#include <random>

#include "curricuforge/geometry.hpp"

namespace oracles {

// Jaccard overlap estimated by counting cell centers on a fine uniform grid
// spanning the union of both boxes. Error is O(1/resolution).
inline double grid_iou(const curricuforge::Box& a, const curricuforge::Box& b, int resolution) {
    const double lo_x = std::min(a.x1, b.x1);
    const double lo_y = std::min(a.y1, b.y1);
    const double hi_x = std::max(a.x2, b.x2);
    const double hi_y = std::max(a.y2, b.y2);
    const double sx = (hi_x - lo_x) / resolution;
    const double sy = (hi_y - lo_y) / resolution;
    long long inter = 0;
    long long uni = 0;
    for (int iy = 0; iy < resolution; ++iy) {
        const double y = lo_y + (iy + 0.5) * sy;
        const bool in_ay = y >= a.y1 && y <= a.y2;
        const bool in_by = y >= b.y1 && y <= b.y2;
        if (!in_ay && !in_by) continue;
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = lo_x + (ix + 0.5) * sx;
            const bool in_a = in_ay && x >= a.x1 && x <= a.x2;
            const bool in_b = in_by && x >= b.x1 && x <= b.x2;
            if (in_a && in_b) ++inter;
            if (in_a || in_b) ++uni;
        }
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::array<double, 4> fd_gradient(const curricuforge::BoxParam& p,
                                         const curricuforge::Box& target, double lambda,
                                         double step) {
    std::array<double, 4> g{};
    std::array<double, 4> raw = {p.cx, p.cy, p.w, p.h};
    for (int i = 0; i < 4; ++i) {
        auto plus = raw;
        auto minus = raw;
        plus[i] += step;
        minus[i] -= step;
        const curricuforge::BoxParam pp{plus[0], plus[1], plus[2], plus[3]};
        const curricuforge::BoxParam pm{minus[0], minus[1], minus[2], minus[3]};
        const double fp = curricuforge::grounding_loss(curricuforge::decode(pp), target, lambda);
        const double fm = curricuforge::grounding_loss(curricuforge::decode(pm), target, lambda);
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

struct GradCase {
    curricuforge::BoxParam param;
    curricuforge::Box target;
    double lambda;
};

// True when the loss surface at (param, target) sits at least `margin` away
// from every non-smooth locus: clamp boundaries of the decoded corners,
// corner ties inside max/min, sign changes of the intersection extents, and
// the Huber transition of each coordinate difference.
inline bool is_kink_free(const curricuforge::BoxParam& p, const curricuforge::Box& t,
                         double margin) {
    const auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double cx = logistic(p.cx);
    const double cy = logistic(p.cy);
    const double w = logistic(p.w);
    const double h = logistic(p.h);
    const double corners[4] = {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
    for (double c : corners) {
        if (std::abs(c) < margin || std::abs(c - 1.0) < margin) return false;
    }
    const curricuforge::Box a{corners[0], corners[1], corners[2], corners[3]};
    const double ties[4] = {a.x1 - t.x1, a.x2 - t.x2, a.y1 - t.y1, a.y2 - t.y2};
    for (double d : ties) {
        if (std::abs(d) < margin) return false;
        if (std::abs(std::abs(d) - 1.0) < margin) return false;
    }
    const double iw = std::min(a.x2, t.x2) - std::max(a.x1, t.x1);
    const double ih = std::min(a.y2, t.y2) - std::max(a.y1, t.y1);
    if (std::abs(iw) < margin || std::abs(ih) < margin) return false;
    return true;
}

inline GradCase sample_kink_free_case(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> param_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> coord_dist(0.05, 0.95);
    std::uniform_int_distribution<int> lambda_pick(0, 2);
    const double lambdas[3] = {0.0, 0.5, 1.0};
    for (;;) {
        curricuforge::BoxParam p{param_dist(rng), param_dist(rng), param_dist(rng),
                                 param_dist(rng)};
        double xs[2] = {coord_dist(rng), coord_dist(rng)};
        double ys[2] = {coord_dist(rng), coord_dist(rng)};
        if (xs[0] > xs[1]) std::swap(xs[0], xs[1]);
        if (ys[0] > ys[1]) std::swap(ys[0], ys[1]);
        if (xs[1] - xs[0] < 0.05 || ys[1] - ys[0] < 0.05) continue;
        const curricuforge::Box t{xs[0], ys[0], xs[1], ys[1]};
        if (!is_kink_free(p, t, 1e-3)) continue;
        return {p, t, lambdas[lambda_pick(rng)]};
    }
}

// Relative disagreement between whole gradient vectors. Comparing norms
// instead of single components keeps finite-difference roundoff on a tiny
// component from dominating the measure.
inline double grad_rel_err(const std::array<double, 4>& fd, const std::array<double, 4>& an) {
    double diff2 = 0.0;
    double fd2 = 0.0;
    double an2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        diff2 += (fd[i] - an[i]) * (fd[i] - an[i]);
        fd2 += fd[i] * fd[i];
        an2 += an[i] * an[i];
    }
    const double denom = std::max({std::sqrt(fd2), std::sqrt(an2), 1e-8});
    return std::sqrt(diff2) / denom;
}

} // namespace oracles
