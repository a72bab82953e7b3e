#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace combcav::numerics
{

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
// Abscissae must be strictly increasing, at least two points. Evaluated in
// offset form so flat runs reproduce their value exactly.
class Pchip
{
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_, y_, d_;
};

// Adaptive Simpson on [a, b] to absolute tolerance `tol`. Throws
// QuadratureError if `max_depth` bisections cannot meet it.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

// Maximises a unimodal f on [a, b]; stops when the bracket is narrower than
// `tol`. Returns the abscissa.
double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol);

// Root of f on [a, b] where f(a) and f(b) differ in sign; stops at bracket
// width `tol`. Throws NumericError if the bracket is invalid.
double bisect(const std::function<double(double)>& f, double a, double b, double tol,
              int max_iter = 200);

} // namespace combcav::numerics
