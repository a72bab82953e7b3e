#pragma once

#include "combcavity/filter_analysis.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace combcav
{

// Linear 1-D spectrograph: pixel = (frequency - reference_frequency) / dispersion.
struct SpectrographModel
{
    int pixels = 160;
    double dispersion = 20e9 / 15.0;    // Hz per pixel
    double psf_sigma = 1.7;             // pixels
    double reference_frequency = 0.0;   // Hz at pixel 0
    bool photon_noise = true;
    double read_noise_sigma = 0.0;      // counts
    double exposure_scale = 1000.0;     // counts per unit mode power

    double pixel_of(double frequency) const { return (frequency - reference_frequency) / dispersion; }
};

void validate(const SpectrographModel& model);

struct SpectralLine
{
    double frequency = 0.0; // Hz
    double power = 0.0;
};

// Pixel-integrated Gaussian PSF per line (truncated at +-8 sigma), then
// optional Poisson and Gaussian read noise drawn from `seed`.
std::vector<double> render_ccd(const std::vector<SpectralLine>& lines, const SpectrographModel& model,
                               std::uint64_t seed);
// Every mode of the spectrum, suppressed side modes included, at its output power.
std::vector<double> render_ccd(const FilteredSpectrum& spectrum, const SpectrographModel& model,
                               std::uint64_t seed);

// Line j of n sits at index N_j = j - (n - 1)/2, so d is the mean line position.
double line_index(int j, int n_lines);

// sum_N a exp(-c (x - b N - d)^2) + e
struct ConstrainedParams
{
    double a = 0.0; // peak counts
    double b = 0.0; // line separation, px
    double c = 0.0; // inverse width, px^-2
    double d = 0.0; // uniform shift, px
    double e = 0.0; // noise floor, counts
};

// Model evaluated at pixel centres x = 0 .. pixels-1. `amplitudes`, when
// non-empty, replaces a line by line.
std::vector<double> constrained_model(const ConstrainedParams& p, int n_lines, std::size_t pixels,
                                      const std::vector<double>& amplitudes = {});

struct FitOptions
{
    std::optional<ConstrainedParams> init;
    std::vector<double> variance;       // per pixel; empty for unit weights
    bool per_line_amplitude = false;    // n_lines + 4 parameters
    int max_iterations = 200;
    double gradient_tolerance = 1e-10;
};

struct CalibrationFitResult
{
    ConstrainedParams params;
    std::vector<double> amplitudes; // per-line amplitudes when enabled
    // Parameter order a, b, c, d, e; with per-line amplitudes a_0..a_{n-1}, b, c, d, e.
    std::vector<std::vector<double>> covariance;
    double chi2 = 0.0;
    int dof = 0;
    double reduced_chi2 = 0.0;
    double residual_rms = 0.0;
    int iterations = 0;

    double sigma(std::size_t i) const;
    double d_sigma() const { return sigma(covariance.size() - 2); }
};

CalibrationFitResult fit_constrained(const std::vector<double>& pixels, int n_lines, const FitOptions& options = {});

struct LineFit
{
    double amplitude = 0.0;
    double width = 0.0;    // Gaussian sigma, px
    double position = 0.0; // px
    double offset = 0.0;
    std::vector<std::vector<double>> covariance; // amplitude, width, position, offset
    bool blended = false;  // sigma > separation/4: the window clips the neighbours
};

struct PerLineFitResult
{
    std::vector<LineFit> lines;
    double separation = 0.0; // px, window size is +-separation/2
};

// Windows of +-b/2 around each detected peak (or the lines placed by
// options.init), each fit with amplitude, width, position and offset.
PerLineFitResult fit_per_line(const std::vector<double>& pixels, int n_lines, const FitOptions& options = {});

// c delta_f / at_frequency, m/s.
double rv_equivalent(double delta_f, double at_frequency);

// Constrained model plus Poisson and read noise.
std::vector<double> simulate_constrained(const ConstrainedParams& p, int n_lines, std::size_t pixels,
                                         bool photon_noise, double read_noise_sigma, std::uint64_t seed);

// Independent seed for Monte Carlo replicate `k` of a run seeded with `base`.
std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t k);

} // namespace combcav
