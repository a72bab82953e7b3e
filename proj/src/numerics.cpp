#include "combcavity/numerics.hpp"
#include "combcavity/errors.hpp"

#include <algorithm>
#include <numbers>

namespace combcav::numerics
{

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
{
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw ValidationError("pchip needs at least two (x, y) pairs");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw ValidationError("pchip abscissae must be strictly increasing");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2)
    {
        d_[0] = d_[1] = delta[0];
        return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k)
    {
        if (delta[k - 1] * delta[k] <= 0.0)
            continue;
        double w1 = 2.0 * h[k] + h[k - 1];
        double w2 = h[k] + 2.0 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    auto end_slope = [](double h0, double h1, double del0, double del1) {
        double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0)
            return 0.0;
        if (del0 * del1 <= 0.0 && std::abs(d) > std::abs(3.0 * del0))
            return 3.0 * del0;
        return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t Pchip::segment(double x) const
{
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    auto i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    return std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
}

double Pchip::operator()(double x) const
{
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i];
    double s = x - x_[i];
    double delta = (y_[i + 1] - y_[i]) / h;
    double c2 = (3.0 * delta - 2.0 * d_[i] - d_[i + 1]) / h;
    double c3 = (d_[i] + d_[i + 1] - 2.0 * delta) / (h * h);
    return y_[i] + s * (d_[i] + s * (c2 + s * c3));
}

double Pchip::derivative(double x) const
{
    std::size_t i = segment(x);
    double h = x_[i + 1] - x_[i];
    double s = x - x_[i];
    double delta = (y_[i + 1] - y_[i]) / h;
    double c2 = (3.0 * delta - 2.0 * d_[i] - d_[i + 1]) / h;
    double c3 = (d_[i] + d_[i + 1] - 2.0 * delta) / (h * h);
    return d_[i] + s * (2.0 * c2 + 3.0 * s * c3);
}

namespace
{

struct SimpsonState
{
    const std::function<double(double)>& f;
    double worst = 0.0;
    bool failed = false;
};

double simpson_step(SimpsonState& st, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth)
{
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = st.f(lm), frm = st.f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol || !(lm > a && m > lm && rm > m && b > rm))
        return left + right + err / 15.0;
    if (depth <= 0)
    {
        st.failed = true;
        st.worst = std::max(st.worst, std::abs(err) / 15.0);
        return left + right + err / 15.0;
    }
    return simpson_step(st, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(st, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth)
{
    if (a == b)
        return 0.0;
    SimpsonState st{f};
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double result = simpson_step(st, a, fa, b, fb, m, fm, whole, tol, max_depth);
    if (st.failed)
        throw QuadratureError("adaptive Simpson did not converge", st.worst);
    return result;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol)
{
    constexpr double invphi = std::numbers::phi - 1.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > tol)
    {
        if (fc >= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            if (!(c > a && c < d))
                break;
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            if (!(d > c && d < b))
                break;
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol, int max_iter)
{
    double fa = f(a), fb = f(b);
    if (fa == 0.0)
        return a;
    if (fb == 0.0)
        return b;
    if ((fa < 0.0) == (fb < 0.0))
        throw NumericError("bisection bracket does not straddle a root");
    for (int i = 0; i < max_iter && std::abs(b - a) > tol; ++i)
    {
        double m = 0.5 * (a + b);
        if (m <= std::min(a, b) || m >= std::max(a, b))
            return m; // bracket at floating-point resolution
        double fm = f(m);
        if (fm == 0.0)
            return m;
        if ((fm < 0.0) == (fa < 0.0))
        {
            a = m;
            fa = fm;
        }
        else
        {
            b = m;
            fb = fm;
        }
    }
    if (std::abs(b - a) > tol)
        throw NumericError("bisection did not reach tolerance");
    return 0.5 * (a + b);
}

} // namespace combcav::numerics
