#include "curricuforge/geometry.hpp"

#include <cmath>

#include "curricuforge/errors.hpp"

namespace curricuforge {
namespace {

// Forward-mode scalar carrying partials w.r.t. the four raw box parameters.
// The loss math below is templated on the scalar type so the gradient path
// and the plain double path share one definition.
struct Dual4 {
    double v = 0.0;
    std::array<double, 4> d{};

    Dual4() = default;
    Dual4(double value) : v(value) {} // NOLINT: implicit from constants
    Dual4(double value, int seed) : v(value) { d[seed] = 1.0; }
};

inline Dual4 operator+(const Dual4& a, const Dual4& b) {
    Dual4 r(a.v + b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
inline Dual4 operator-(const Dual4& a, const Dual4& b) {
    Dual4 r(a.v - b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
inline Dual4 operator*(const Dual4& a, const Dual4& b) {
    Dual4 r(a.v * b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
inline Dual4 operator/(const Dual4& a, const Dual4& b) {
    Dual4 r(a.v / b.v);
    const double inv2 = 1.0 / (b.v * b.v);
    for (int i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
    return r;
}
inline Dual4 operator-(const Dual4& a) {
    Dual4 r(-a.v);
    for (int i = 0; i < 4; ++i) r.d[i] = -a.d[i];
    return r;
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual4& x) { return x.v; }

// Ties route the derivative through the first operand.
template <typename T>
inline T max_first(const T& a, const T& b) {
    return value_of(a) >= value_of(b) ? a : b;
}
template <typename T>
inline T min_first(const T& a, const T& b) {
    return value_of(a) <= value_of(b) ? a : b;
}

template <typename T>
inline T clamp01(const T& x) {
    return min_first(max_first(x, T(0.0)), T(1.0));
}

inline Dual4 logistic(const Dual4& z) {
    const double s = 1.0 / (1.0 + std::exp(-z.v));
    Dual4 r(s);
    const double ds = s * (1.0 - s);
    for (int i = 0; i < 4; ++i) r.d[i] = ds * z.d[i];
    return r;
}
inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <typename T>
struct Corners {
    T x1, y1, x2, y2;
};

template <typename T>
Corners<T> decode_impl(const T& cx, const T& cy, const T& w, const T& h) {
    const T scx = logistic(cx);
    const T scy = logistic(cy);
    const T sw = logistic(w);
    const T sh = logistic(h);
    const T half(0.5);
    return {clamp01<T>(scx - sw * half), clamp01<T>(scy - sh * half),
            clamp01<T>(scx + sw * half), clamp01<T>(scy + sh * half)};
}

template <typename T>
T smooth_l1_impl(const Corners<T>& p, const Corners<double>& t) {
    const T diffs[4] = {p.x1 - T(t.x1), p.y1 - T(t.y1), p.x2 - T(t.x2), p.y2 - T(t.y2)};
    T sum(0.0);
    for (const T& d : diffs) {
        const double dv = value_of(d);
        if (std::abs(dv) < 1.0) {
            sum = sum + d * d * T(0.5);
        } else if (dv >= 0.0) {
            sum = sum + d - T(0.5);
        } else {
            sum = sum - d - T(0.5);
        }
    }
    return sum * T(0.25);
}

template <typename T>
T iou_impl(const Corners<T>& a, const Corners<double>& b) {
    const T iw = max_first<T>(min_first<T>(a.x2, T(b.x2)) - max_first<T>(a.x1, T(b.x1)), T(0.0));
    const T ih = max_first<T>(min_first<T>(a.y2, T(b.y2)) - max_first<T>(a.y1, T(b.y1)), T(0.0));
    const T inter = iw * ih;
    const T uni = (a.x2 - a.x1) * (a.y2 - a.y1) + T((b.x2 - b.x1) * (b.y2 - b.y1)) - inter;
    return inter / uni;
}

template <typename T>
T giou_impl(const Corners<T>& a, const Corners<double>& b) {
    const T iw = max_first<T>(min_first<T>(a.x2, T(b.x2)) - max_first<T>(a.x1, T(b.x1)), T(0.0));
    const T ih = max_first<T>(min_first<T>(a.y2, T(b.y2)) - max_first<T>(a.y1, T(b.y1)), T(0.0));
    const T inter = iw * ih;
    const T uni = (a.x2 - a.x1) * (a.y2 - a.y1) + T((b.x2 - b.x1) * (b.y2 - b.y1)) - inter;
    const T cw = max_first<T>(a.x2, T(b.x2)) - min_first<T>(a.x1, T(b.x1));
    const T ch = max_first<T>(a.y2, T(b.y2)) - min_first<T>(a.y1, T(b.y1));
    const T carea = cw * ch;
    return inter / uni - (carea - uni) / carea;
}

template <typename T>
T grounding_loss_impl(const Corners<T>& p, const Corners<double>& t, double lambda) {
    T loss = smooth_l1_impl(p, t);
    if (lambda != 0.0) {
        loss = loss + T(lambda) * (T(1.0) - giou_impl(p, t));
    }
    return loss;
}

Corners<double> as_corners(const Box& b) { return {b.x1, b.y1, b.x2, b.y2}; }

} // namespace

bool box_is_valid(const Box& b) {
    return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
           std::isfinite(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

void validate_box(const Box& b, const char* what) {
    if (!box_is_valid(b)) {
        throw ValidationError(std::string(what) + " has non-finite or unordered corners");
    }
}

bool box_in_unit_range(const Box& b) {
    return box_is_valid(b) && b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= 1.0 && b.y2 <= 1.0;
}

double box_area(const Box& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

double iou(const Box& a, const Box& b) {
    validate_box(a, "first box");
    validate_box(b, "second box");
    const double iw = std::max(std::min(a.x2, b.x2) - std::max(a.x1, b.x1), 0.0);
    const double ih = std::max(std::min(a.y2, b.y2) - std::max(a.y1, b.y1), 0.0);
    const double inter = iw * ih;
    const double uni = box_area(a) + box_area(b) - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double giou(const Box& a, const Box& b) {
    validate_box(a, "first box");
    validate_box(b, "second box");
    if (box_area(a) == 0.0 && box_area(b) == 0.0) {
        throw DegenerateGeometryError("giou of two zero-area boxes");
    }
    return giou_impl<double>(as_corners(a), as_corners(b));
}

double smooth_l1(const Box& pred, const Box& target) {
    validate_box(pred, "pred box");
    validate_box(target, "target box");
    return smooth_l1_impl<double>(as_corners(pred), as_corners(target));
}

double grounding_loss(const Box& pred, const Box& target, double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("grounding loss coefficient must be >= 0");
    validate_box(pred, "pred box");
    validate_box(target, "target box");
    return grounding_loss_impl<double>(as_corners(pred), as_corners(target), lambda);
}

Box decode(const BoxParam& p) {
    if (!(std::isfinite(p.cx) && std::isfinite(p.cy) && std::isfinite(p.w) && std::isfinite(p.h))) {
        throw ValidationError("box parameters must be finite");
    }
    const auto c = decode_impl<double>(p.cx, p.cy, p.w, p.h);
    return {c.x1, c.y1, c.x2, c.y2};
}

LossGrad grounding_loss_grad(const BoxParam& p, const Box& target, double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("grounding loss coefficient must be >= 0");
    if (!(std::isfinite(p.cx) && std::isfinite(p.cy) && std::isfinite(p.w) && std::isfinite(p.h))) {
        throw ValidationError("box parameters must be finite");
    }
    validate_box(target, "target box");
    const auto corners = decode_impl<Dual4>(Dual4(p.cx, 0), Dual4(p.cy, 1), Dual4(p.w, 2), Dual4(p.h, 3));
    const Dual4 loss = grounding_loss_impl<Dual4>(corners, as_corners(target), lambda);
    return {loss.v, loss.d};
}

} // namespace curricuforge
