#pragma once

#include <numbers>

namespace combcav
{

inline constexpr double kSpeedOfLight = 299792458.0; // m/s, exact
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Vacuum wavelength <-> optical frequency.
constexpr double wavelength_to_frequency(double wavelength_m) { return kSpeedOfLight / wavelength_m; }
constexpr double frequency_to_wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

// Closed intervals. Empty when lo > hi.
struct FrequencyBand
{
    double lo = 0.0; // Hz
    double hi = 0.0; // Hz

    bool empty() const { return lo > hi; }
    double width() const { return empty() ? 0.0 : hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double f) const { return f >= lo && f <= hi; }
};

struct WavelengthBand
{
    double lo = 0.0; // m
    double hi = 0.0; // m

    bool empty() const { return lo > hi; }
    double width() const { return empty() ? 0.0 : hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double w) const { return w >= lo && w <= hi; }
};

inline FrequencyBand to_frequency(const WavelengthBand& b)
{
    return {wavelength_to_frequency(b.hi), wavelength_to_frequency(b.lo)};
}

inline WavelengthBand to_wavelength(const FrequencyBand& b)
{
    return {frequency_to_wavelength(b.hi), frequency_to_wavelength(b.lo)};
}

} // namespace combcav
