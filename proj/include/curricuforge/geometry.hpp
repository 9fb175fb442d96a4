#pragma once

#include <array>

namespace curricuforge {

/// Axis-aligned rectangle in a normalized frame. Corners are (x1,y1) top-left
/// and (x2,y2) bottom-right with x1 <= x2 and y1 <= y2; zero area is allowed.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    bool operator==(const Box&) const = default;
};

/// Raw pre-activation box parameters (center/size before squashing).
/// Any finite values decode to a valid Box.
struct BoxParam {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

/// True when all coordinates are finite and corners are ordered.
bool box_is_valid(const Box& b);

/// Throws ValidationError when box_is_valid fails. `what` names the offender
/// in the message.
void validate_box(const Box& b, const char* what = "box");

/// True when the box additionally lies inside the unit square.
bool box_in_unit_range(const Box& b);

double box_area(const Box& b);

/// Jaccard overlap in [0,1]. Returns 0 when the union has zero area.
double iou(const Box& a, const Box& b);

/// Generalized overlap in [-1,1]: iou minus the enclosing-box slack ratio.
/// Throws DegenerateGeometryError when both boxes have zero area.
double giou(const Box& a, const Box& b);

/// Elementwise Huber distance with transition 1, averaged over the four
/// coordinates. Accepts boxes outside the unit range (pre-clamp values).
double smooth_l1(const Box& pred, const Box& target);

/// smooth_l1 + lambda * (1 - giou). The giou term is skipped when lambda == 0.
double grounding_loss(const Box& pred, const Box& target, double lambda);

/// Squash (cx,cy,w,h) through a logistic map, convert to corners, clamp the
/// corners to [0,1]. Total on finite inputs; throws ValidationError otherwise.
Box decode(const BoxParam& p);

struct LossGrad {
    double value = 0.0;
    std::array<double, 4> d{}; // d(loss)/d(cx, cy, w, h)
};

/// Analytic gradient of grounding_loss(decode(p), target, lambda) with respect
/// to the four raw parameters. At max/min ties the subgradient of the first
/// operand is used, so the result is deterministic at kinks.
LossGrad grounding_loss_grad(const BoxParam& p, const Box& target, double lambda);

} // namespace curricuforge
