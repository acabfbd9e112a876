#pragma once

#include <functional>
#include <utility>

namespace hestonvi {

/// Value and partial derivatives up to second order of a function of (x, y).
struct Jet2
{
    double v = 0.0;
    double x = 0.0;
    double y = 0.0;
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

inline Jet2 operator+(const Jet2& a, const Jet2& b)
{
    return {a.v + b.v, a.x + b.x, a.y + b.y, a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}

inline Jet2 operator-(const Jet2& a, const Jet2& b)
{
    return {a.v - b.v, a.x - b.x, a.y - b.y, a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}

inline Jet2 operator*(double s, const Jet2& a)
{
    return {s * a.v, s * a.x, s * a.y, s * a.xx, s * a.xy, s * a.yy};
}

// Leibniz rule up to second order.
inline Jet2 operator*(const Jet2& a, const Jet2& b)
{
    return {a.v * b.v,
            a.x * b.v + a.v * b.x,
            a.y * b.v + a.v * b.y,
            a.xx * b.v + 2.0 * a.x * b.x + a.v * b.xx,
            a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
            a.yy * b.v + 2.0 * a.y * b.y + a.v * b.yy};
}

/// A twice differentiable function on the half-plane, evaluated with its jet.
class Field
{
public:
    using Fn = std::function<Jet2(double, double)>;

    Field() : fn_([](double, double) { return Jet2{}; }) {}
    explicit Field(Fn fn) : fn_(std::move(fn)) {}

    Jet2 jet(double x, double y) const { return fn_(x, y); }
    double operator()(double x, double y) const { return fn_(x, y).v; }

    static Field constant(double c);
    /// d0 + d2 y
    static Field affine(double d0, double d2);
    /// c e^{L x}
    static Field exp_x(double c, double L);
    /// c e^{K y}
    static Field exp_y(double c, double K);
    /// (E - e^x)^+ ; derivatives taken from the active branch (a.e. sense).
    static Field put_payoff(double strike);

    friend Field operator+(const Field& a, const Field& b);
    friend Field operator-(const Field& a, const Field& b);
    friend Field operator*(const Field& a, const Field& b);
    friend Field operator*(double s, const Field& a);

private:
    Fn fn_;
};

/// Value and first two derivatives of a function of one variable.
struct Jet1
{
    double v = 0.0;
    double d = 0.0;
    double dd = 0.0;
};

using Profile = std::function<Jet1(double)>;

} // namespace hestonvi
