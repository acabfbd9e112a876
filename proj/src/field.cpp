#include "hestonvi/field.hpp"

#include <cmath>

namespace hestonvi {

Field Field::constant(double c)
{
    return Field([c](double, double) { return Jet2{c}; });
}

Field Field::affine(double d0, double d2)
{
    return Field([d0, d2](double, double y) {
        Jet2 j;
        j.v = d0 + d2 * y;
        j.y = d2;
        return j;
    });
}

Field Field::exp_x(double c, double L)
{
    return Field([c, L](double x, double) {
        const double e = c * std::exp(L * x);
        Jet2 j;
        j.v = e;
        j.x = L * e;
        j.xx = L * L * e;
        return j;
    });
}

Field Field::exp_y(double c, double K)
{
    return Field([c, K](double, double y) {
        const double e = c * std::exp(K * y);
        Jet2 j;
        j.v = e;
        j.y = K * e;
        j.yy = K * K * e;
        return j;
    });
}

Field Field::put_payoff(double strike)
{
    return Field([strike](double x, double) {
        const double ex = std::exp(x);
        Jet2 j;
        if (ex < strike) {
            j.v = strike - ex;
            j.x = -ex;
            j.xx = -ex;
        }
        return j;
    });
}

Field operator+(const Field& a, const Field& b)
{
    return Field([a, b](double x, double y) { return a.jet(x, y) + b.jet(x, y); });
}

Field operator-(const Field& a, const Field& b)
{
    return Field([a, b](double x, double y) { return a.jet(x, y) - b.jet(x, y); });
}

Field operator*(const Field& a, const Field& b)
{
    return Field([a, b](double x, double y) { return a.jet(x, y) * b.jet(x, y); });
}

Field operator*(double s, const Field& a)
{
    return Field([s, a](double x, double y) { return s * a.jet(x, y); });
}

} // namespace hestonvi
