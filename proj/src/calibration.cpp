#include "combcavity/calibration.hpp"
#include "combcavity/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace combcav
{

void validate(const SpectrographModel& model)
{
    if (model.pixels < 16)
        throw ValidationError("spectrograph needs at least 16 pixels");
    if (!(model.dispersion > 0.0))
        throw ValidationError("dispersion must be positive");
    if (!(model.psf_sigma > 0.0))
        throw ValidationError("psf sigma must be positive");
    if (!(model.read_noise_sigma >= 0.0))
        throw ValidationError("read noise must be non-negative");
    if (!(model.exposure_scale > 0.0))
        throw ValidationError("exposure scale must be positive");
}

std::vector<double> render_ccd(const std::vector<SpectralLine>& lines, const SpectrographModel& model,
                               std::uint64_t seed)
{
    validate(model);
    const double s = model.psf_sigma;
    const double k = 1.0 / (std::sqrt(2.0) * s);
    std::vector<double> counts(std::size_t(model.pixels), 0.0);
    std::size_t on_detector = 0;
    for (const auto& line : lines)
    {
        if (!(line.power >= 0.0))
            throw ValidationError("line power must be non-negative");
        const double x = model.pixel_of(line.frequency);
        if (x >= -0.5 && x <= model.pixels - 0.5)
            ++on_detector;
        const double lo = std::max(0.0, std::ceil(x - 8.0 * s - 0.5));
        const double hi = std::min(double(model.pixels - 1), std::floor(x + 8.0 * s + 0.5));
        const double area = model.exposure_scale * line.power;
        for (double i = lo; i <= hi; i += 1.0)
        {
            const double a = std::max(i - 0.5, x - 8.0 * s);
            const double b = std::min(i + 0.5, x + 8.0 * s);
            if (b > a)
                counts[std::size_t(i)] += 0.5 * area * (std::erf((b - x) * k) - std::erf((a - x) * k));
        }
    }
    if (on_detector == 0)
        throw ValidationError("no spectral line falls on the detector");

    std::mt19937_64 rng(seed);
    if (model.photon_noise)
        for (auto& c : counts)
            if (c > 0.0)
                c = double(std::poisson_distribution<long long>(c)(rng));
    if (model.read_noise_sigma > 0.0)
    {
        std::normal_distribution<double> read(0.0, model.read_noise_sigma);
        for (auto& c : counts)
            c += read(rng);
    }
    return counts;
}

std::vector<double> render_ccd(const FilteredSpectrum& spectrum, const SpectrographModel& model,
                               std::uint64_t seed)
{
    std::vector<SpectralLine> lines;
    lines.reserve(spectrum.modes.size());
    for (const auto& m : spectrum.modes)
        lines.push_back({m.frequency, m.output_power()});
    return render_ccd(lines, model, seed);
}

double line_index(int j, int n_lines)
{
    return double(j) - 0.5 * double(n_lines - 1);
}

std::vector<double> constrained_model(const ConstrainedParams& p, int n_lines, std::size_t pixels,
                                      const std::vector<double>& amplitudes)
{
    std::vector<double> y(pixels, p.e);
    for (int j = 0; j < n_lines; ++j)
    {
        const double a = amplitudes.empty() ? p.a : amplitudes.at(std::size_t(j));
        const double center = p.b * line_index(j, n_lines) + p.d;
        for (std::size_t i = 0; i < pixels; ++i)
        {
            const double u = double(i) - center;
            y[i] += a * std::exp(-p.c * u * u);
        }
    }
    return y;
}

double CalibrationFitResult::sigma(std::size_t i) const
{
    return std::sqrt(std::max(0.0, covariance.at(i).at(i)));
}

namespace
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LmProblem
{
    // Fills the model and, when requested, d(model)/d(p).
    std::function<void(const VectorXd&, VectorXd&, MatrixXd*)> eval;
    std::function<bool(const VectorXd&)> valid;
};

struct LmOutcome
{
    VectorXd p;
    MatrixXd jtj; // weighted normal matrix at the solution
    double chi2 = 0.0;
    int iterations = 0;
};

std::vector<double> to_std(const VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

LmOutcome levenberg_marquardt(const LmProblem& prob, const VectorXd& y, const VectorXd& w, VectorXd p,
                              int max_iterations, double gtol)
{
    const auto np = p.size();
    VectorXd model(y.size());
    MatrixXd jac(y.size(), np);
    auto residual = [&](const VectorXd& params, bool with_jac, VectorXd& r, MatrixXd& j) {
        prob.eval(params, model, with_jac ? &jac : nullptr);
        r = (y - model).cwiseProduct(w);
        if (with_jac)
            j = w.asDiagonal() * jac;
    };

    VectorXd r;
    MatrixXd j;
    residual(p, true, r, j);
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;
    for (int it = 1; it <= max_iterations; ++it)
    {
        const MatrixXd a = j.transpose() * j;
        const VectorXd g = j.transpose() * r;
        const double rn = std::sqrt(chi2);
        double worst = 0.0;
        for (Eigen::Index k = 0; k < np; ++k)
        {
            const double cn = j.col(k).norm();
            if (cn > 0.0 && rn > 0.0)
                worst = std::max(worst, std::abs(g(k)) / (cn * rn));
        }
        if (rn == 0.0 || worst < gtol)
            return {p, a, chi2, it - 1};

        VectorXd diag = a.diagonal();
        const double floor = 1e-30 * std::max(diag.maxCoeff(), 1e-300);
        diag = diag.cwiseMax(floor);
        while (true)
        {
            MatrixXd damped = a;
            damped.diagonal() += lambda * diag;
            const VectorXd step = damped.ldlt().solve(g);
            const VectorXd trial = p + step;
            VectorXd rt;
            MatrixXd jt;
            if (step.allFinite() && prob.valid(trial))
            {
                residual(trial, false, rt, jt);
                const double chi2t = rt.squaredNorm();
                if (std::isfinite(chi2t) && chi2t < chi2)
                {
                    p = trial;
                    chi2 = chi2t;
                    residual(p, true, r, j);
                    lambda = std::max(lambda * 0.1, 1e-15);
                    bool tiny = true;
                    for (Eigen::Index k = 0; k < np; ++k)
                        tiny = tiny && std::abs(step(k)) <= 1e-14 * std::abs(p(k));
                    if (tiny)
                        return {p, j.transpose() * j, chi2, it};
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e20) // no descent left at working precision
                return {p, a, chi2, it};
        }
    }
    throw FitError("Levenberg-Marquardt did not converge in " + std::to_string(max_iterations) + " iterations",
                   to_std(p));
}

VectorXd weights(const std::vector<double>& variance, std::size_t n)
{
    VectorXd w = VectorXd::Ones(Eigen::Index(n));
    if (variance.empty())
        return w;
    if (variance.size() != n)
        throw ValidationError("variance vector length differs from the pixel count");
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(variance[i] > 0.0))
            throw ValidationError("pixel variances must be positive");
        w(Eigen::Index(i)) = 1.0 / std::sqrt(variance[i]);
    }
    return w;
}

MatrixXd covariance_of(const MatrixXd& jtj, double chi2, int dof, bool scale)
{
    MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
    if (scale && dof > 0)
        cov *= chi2 / dof;
    return cov;
}

std::vector<std::vector<double>> to_nested(const MatrixXd& m)
{
    std::vector<std::vector<double>> out(std::size_t(m.rows()), std::vector<double>(std::size_t(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            out[std::size_t(i)][std::size_t(k)] = 0.5 * (m(i, k) + m(k, i));
    return out;
}

struct Peak
{
    double position = 0.0;
    double height = 0.0; // above floor
    double fwhm = 0.0;
};

double quantile(std::vector<double> v, double q)
{
    const std::size_t k = std::min(v.size() - 1, std::size_t(q * double(v.size() - 1) + 0.5));
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
    return v[k];
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Peak> detect_peaks(const std::vector<double>& y, int n_lines, double& floor)
{
    floor = quantile(y, 0.25);
    const double top = *std::max_element(y.begin(), y.end());
    const double threshold = floor + 0.3 * (top - floor);
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n;)
    {
        if (!(y[i] > threshold) || top <= floor)
        {
            ++i;
            continue;
        }
        std::size_t best = i;
        std::size_t end = i;
        while (end < n && y[end] > threshold)
        {
            if (y[end] > y[best])
                best = end;
            ++end;
        }
        Peak p{double(best), y[best] - floor, 0.0};
        if (best > 0 && best + 1 < n)
        {
            const double den = y[best - 1] - 2.0 * y[best] + y[best + 1];
            if (den < 0.0)
                p.position += 0.5 * (y[best - 1] - y[best + 1]) / den;
        }
        const double half = floor + 0.5 * (y[best] - floor);
        double left = double(best), right = double(best);
        for (std::size_t k = best; k > 0; --k)
            if (y[k - 1] < half)
            {
                left = double(k - 1) + (half - y[k - 1]) / (y[k] - y[k - 1]);
                break;
            }
        for (std::size_t k = best; k + 1 < n; ++k)
            if (y[k + 1] < half)
            {
                right = double(k) + (y[k] - half) / (y[k] - y[k + 1]);
                break;
            }
        p.fwhm = std::max(right - left, 1.0);
        peaks.push_back(p);
        i = end;
    }
    if (int(peaks.size()) < n_lines)
        throw FitError("initialisation found " + std::to_string(peaks.size()) + " peaks, need " +
                           std::to_string(n_lines),
                       {});
    if (int(peaks.size()) > n_lines)
    {
        std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
        peaks.resize(std::size_t(n_lines));
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.position < b.position; });
    return peaks;
}

ConstrainedParams initial_guess(const std::vector<double>& y, int n_lines)
{
    double floor = 0.0;
    const auto peaks = detect_peaks(y, n_lines, floor);
    std::vector<double> spacing, heights, widths;
    double mean_pos = 0.0;
    for (std::size_t i = 0; i < peaks.size(); ++i)
    {
        if (i > 0)
            spacing.push_back(peaks[i].position - peaks[i - 1].position);
        heights.push_back(peaks[i].height);
        widths.push_back(peaks[i].fwhm);
        mean_pos += peaks[i].position;
    }
    const double fwhm = median(widths);
    return {median(heights), median(spacing), 4.0 * std::log(2.0) / (fwhm * fwhm), mean_pos / double(peaks.size()),
            floor};
}

void check_input(const std::vector<double>& pixels, int n_lines)
{
    if (n_lines < 3)
        throw ValidationError("at least 3 lines are required");
    if (pixels.size() < 16)
        throw ValidationError("at least 16 pixels are required");
    for (double v : pixels)
        if (!std::isfinite(v))
            throw ValidationError("pixel values must be finite");
}

} // namespace

CalibrationFitResult fit_constrained(const std::vector<double>& pixels, int n_lines, const FitOptions& options)
{
    check_input(pixels, n_lines);
    const ConstrainedParams init = options.init ? *options.init : initial_guess(pixels, n_lines);
    const std::size_t n = pixels.size();
    const bool per_line = options.per_line_amplitude;
    const Eigen::Index na = per_line ? n_lines : 1;
    const Eigen::Index np = na + 4; // amplitudes, then b, c, d, e

    VectorXd p(np);
    for (Eigen::Index k = 0; k < na; ++k)
        p(k) = init.a;
    p.tail(4) << init.b, init.c, init.d, init.e;

    LmProblem prob;
    prob.eval = [&](const VectorXd& q, VectorXd& model, MatrixXd* jac) {
        const double b = q(na), c = q(na + 1), d = q(na + 2), e = q(na + 3);
        model.setConstant(e);
        if (jac)
        {
            jac->setZero();
            jac->col(na + 3).setOnes();
        }
        for (int j = 0; j < n_lines; ++j)
        {
            const Eigen::Index ai = per_line ? j : 0;
            const double a = q(ai);
            const double idx = line_index(j, n_lines);
            const double center = b * idx + d;
            for (std::size_t i = 0; i < n; ++i)
            {
                const double u = double(i) - center;
                const double g = std::exp(-c * u * u);
                const auto row = Eigen::Index(i);
                model(row) += a * g;
                if (jac)
                {
                    (*jac)(row, ai) += g;
                    (*jac)(row, na) += a * g * 2.0 * c * u * idx;
                    (*jac)(row, na + 1) -= a * g * u * u;
                    (*jac)(row, na + 2) += a * g * 2.0 * c * u;
                }
            }
        }
    };
    prob.valid = [&](const VectorXd& q) { return q(na) > 0.0 && q(na + 1) > 0.0; };

    const VectorXd y = Eigen::Map<const VectorXd>(pixels.data(), Eigen::Index(n));
    const VectorXd w = weights(options.variance, n);
    const auto lm = levenberg_marquardt(prob, y, w, p, options.max_iterations, options.gradient_tolerance);

    CalibrationFitResult out;
    const auto& q = lm.p;
    double a_mean = 0.0;
    for (Eigen::Index k = 0; k < na; ++k)
        a_mean += q(k);
    out.params = {a_mean / double(na), q(na), q(na + 1), q(na + 2), q(na + 3)};
    if (per_line)
        out.amplitudes.assign(q.data(), q.data() + na);
    out.chi2 = lm.chi2;
    out.dof = int(n) - int(np);
    out.reduced_chi2 = out.dof > 0 ? lm.chi2 / out.dof : 0.0;
    out.iterations = lm.iterations;
    out.covariance = to_nested(covariance_of(lm.jtj, lm.chi2, out.dof, options.variance.empty()));

    VectorXd model(static_cast<Eigen::Index>(n));
    prob.eval(q, model, nullptr);
    out.residual_rms = std::sqrt((y - model).squaredNorm() / double(n));
    return out;
}

PerLineFitResult fit_per_line(const std::vector<double>& pixels, int n_lines, const FitOptions& options)
{
    check_input(pixels, n_lines);
    std::vector<double> centers;
    double separation = 0.0, c0 = 0.0, floor = 0.0;
    if (options.init)
    {
        separation = options.init->b;
        c0 = options.init->c;
        floor = options.init->e;
        for (int j = 0; j < n_lines; ++j)
            centers.push_back(options.init->b * line_index(j, n_lines) + options.init->d);
    }
    else
    {
        const auto guess = initial_guess(pixels, n_lines);
        separation = guess.b;
        c0 = guess.c;
        floor = guess.e;
        for (int j = 0; j < n_lines; ++j)
            centers.push_back(guess.b * line_index(j, n_lines) + guess.d);
    }
    if (!(separation > 0.0) || !(c0 > 0.0))
        throw ValidationError("per-line fit needs positive separation and width");

    const auto n = std::ptrdiff_t(pixels.size());
    PerLineFitResult out;
    out.separation = separation;
    for (double center : centers)
    {
        const auto lo = std::max<std::ptrdiff_t>(0, std::ptrdiff_t(std::ceil(center - 0.5 * separation)));
        const auto hi = std::min<std::ptrdiff_t>(n - 1, std::ptrdiff_t(std::floor(center + 0.5 * separation)));
        if (hi - lo + 1 < 5)
            throw ValidationError("line window at pixel " + std::to_string(center) + " holds fewer than 5 pixels");
        const auto m = hi - lo + 1;
        VectorXd y(m), w = VectorXd::Ones(m);
        for (std::ptrdiff_t i = 0; i < m; ++i)
        {
            y(i) = pixels[std::size_t(lo + i)];
            if (!options.variance.empty())
                w(i) = 1.0 / std::sqrt(options.variance.at(std::size_t(lo + i)));
        }
        const auto peak_it = std::max_element(y.data(), y.data() + m);
        VectorXd p(4);
        p << *peak_it - floor, c0, center, floor;

        LmProblem prob;
        prob.eval = [&](const VectorXd& q, VectorXd& model, MatrixXd* jac) {
            for (std::ptrdiff_t i = 0; i < m; ++i)
            {
                const double u = double(lo + i) - q(2);
                const double g = std::exp(-q(1) * u * u);
                model(i) = q(0) * g + q(3);
                if (jac)
                {
                    (*jac)(i, 0) = g;
                    (*jac)(i, 1) = -q(0) * g * u * u;
                    (*jac)(i, 2) = q(0) * g * 2.0 * q(1) * u;
                    (*jac)(i, 3) = 1.0;
                }
            }
        };
        prob.valid = [](const VectorXd& q) { return q(1) > 0.0; };
        const auto lm = levenberg_marquardt(prob, y, w, p, options.max_iterations, options.gradient_tolerance);

        const auto& q = lm.p;
        const int dof = int(m) - 4;
        MatrixXd cov = covariance_of(lm.jtj, lm.chi2, dof, options.variance.empty());
        // Report the width as sigma = 1/sqrt(2c).
        MatrixXd t = MatrixXd::Identity(4, 4);
        t(1, 1) = -std::pow(2.0 * q(1), -1.5);
        cov = t * cov * t.transpose();

        LineFit line;
        line.amplitude = q(0);
        line.width = 1.0 / std::sqrt(2.0 * q(1));
        line.position = q(2);
        line.offset = q(3);
        line.covariance = to_nested(cov);
        line.blended = line.width > 0.25 * separation;
        out.lines.push_back(std::move(line));
    }
    return out;
}

double rv_equivalent(double delta_f, double at_frequency)
{
    if (!(at_frequency > 0.0))
        throw DomainError("reference frequency must be positive");
    return kSpeedOfLight * delta_f / at_frequency;
}

std::vector<double> simulate_constrained(const ConstrainedParams& p, int n_lines, std::size_t pixels,
                                         bool photon_noise, double read_noise_sigma, std::uint64_t seed)
{
    auto y = constrained_model(p, n_lines, pixels);
    std::mt19937_64 rng(seed);
    if (photon_noise)
        for (auto& v : y)
            if (v > 0.0)
                v = double(std::poisson_distribution<long long>(v)(rng));
    if (read_noise_sigma > 0.0)
    {
        std::normal_distribution<double> read(0.0, read_noise_sigma);
        for (auto& v : y)
            v += read(rng);
    }
    return y;
}

std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t k)
{
    // splitmix64 of base + k * golden gamma
    std::uint64_t z = base + (k + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace combcav
