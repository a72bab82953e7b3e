#pragma once

#include "combcavity/air_index.hpp"
#include "combcavity/comb_model.hpp"
#include "combcavity/mirror_model.hpp"

#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <variant>

namespace combcav
{

struct Vacuum
{
};

// Synthetic dispersive filling: n(f) = index + delta_n (f - reference) / reference,
// so delta_n is the index change per unit fractional frequency (lambda |dn/dlambda|).
struct LinearDispersion
{
    double index = 1.0;
    double reference_frequency = 0.0; // Hz
    double delta_n = 0.0;
};

using Medium = std::variant<Vacuum, AirConditions, LinearDispersion>;

double refractive_index(const Medium& medium, double frequency);
void validate(const Medium& medium);
std::string describe(const Medium& medium);

inline constexpr double kFlatMirror = std::numeric_limits<double>::infinity();

struct CavitySpec
{
    double length = 0.0; // m
    std::shared_ptr<const CoatingModel> coating;
    double mirror_radius = kFlatMirror; // m
    Medium medium = Vacuum{};
    std::optional<double> geometric_phase; // rad; Gouy formula when unset

    CavitySpec with_length(double new_length) const;
};

void validate(const CavitySpec& cavity);

// 2 arccos(1 - L/r). Zero for flat mirrors.
double gouy_phase(double length, double mirror_radius);
double geometric_phase(const CavitySpec& cavity);

// 4 pi n f L / c + 2 phi_r + phi_D.
double round_trip_phase(const CavitySpec& cavity, double frequency);

// theta(f0 + offset) - theta(f0), keeping the propagation term exact for
// offsets far below the ulp of f0.
double round_trip_phase_change(const CavitySpec& cavity, double f0, double offset);

// (1 - R) / (1 - R exp(i theta)).
std::complex<double> cavity_field(const CavitySpec& cavity, double frequency);
double cavity_transmission(const CavitySpec& cavity, double frequency);
// |E|^2 for reflectivity R at round-trip phase theta.
double airy_transmission(double reflectivity, double theta);

// Resonance (round-trip phase = 2 pi q) closest to `frequency`, bracketed by a
// scan with step <= FWHM/4 and bisected to `tolerance` Hz.
double find_resonance(const CavitySpec& cavity, double frequency, double tolerance = 1.0);

// Spacing of the resonances adjacent to the one nearest `frequency`.
double local_fsr(const CavitySpec& cavity, double frequency);

// Full width at half transmission of the resonance nearest `frequency`.
double resonance_fwhm(const CavitySpec& cavity, double frequency);

// Length whose local resonance spacing at `lock_wavelength` is m f_rep.
// The medium enters through its phase index at the lock wavelength; mirror
// phase dispersion is resolved numerically.
double nominal_length(double f_rep, int m_filter, const Medium& medium,
                      std::shared_ptr<const CoatingModel> coating, double lock_wavelength,
                      double mirror_radius = kFlatMirror);

struct LockConfig
{
    double filter_center = 0.0;    // m
    double filter_width = 2e-9;    // m
    int m_filter = 2;
    double search_halfwidth = 0.0; // m; 0 selects one resonance period

    WavelengthBand filter_band() const
    {
        return {filter_center - 0.5 * filter_width, filter_center + 0.5 * filter_width};
    }
};

void validate(const LockConfig& lock, const CoatingModel& coating);

struct LockResult
{
    double length = 0.0;     // m
    double objective = 0.0;  // sum of envelope-weighted transmission in the filter band
    std::size_t modes = 0;   // comb modes inside the filter band
    double center = 0.0;     // centre of the searched window, m
    double halfwidth = 0.0;  // m
};

// Maximises transmitted power in the filter band over cavity length by a grid
// scan followed by golden-section refinement. The window is centred on
// `center_length` when given, else on the nominal length.
LockResult lock_cavity(const CombSpec& comb, const CavitySpec& cavity, const LockConfig& lock,
                       std::optional<double> center_length = std::nullopt);

// Length change moving a resonance near `frequency` by one comb spacing.
double comb_step_length(const CavitySpec& cavity, double f_rep, double frequency);

// Resonance frequency minus comb-mode frequency for the mode nearest `frequency`.
double delta_nu_cc(const CombSpec& comb, const CavitySpec& cavity, double frequency);

} // namespace combcav
