#include "combcavity/air_index.hpp"
#include "combcavity/errors.hpp"

#include <cmath>

namespace combcav
{
namespace
{

constexpr double kGas = 8.314510;      // J/(mol K)
constexpr double kMolarWater = 0.018015; // kg/mol

// BIPM-1981/91 compressibility of moist air.
double compressibility(double p, double T, double xw)
{
    constexpr double a0 = 1.58123e-6, a1 = -2.9331e-8, a2 = 1.1043e-10;
    constexpr double b0 = 5.707e-6, b1 = -2.051e-8;
    constexpr double c0 = 1.9898e-4, c1 = -2.376e-6;
    constexpr double d = 1.83e-11, e = -0.765e-8;
    double t = T - 273.15;
    double pt = p / T;
    return 1.0 - pt * (a0 + a1 * t + a2 * t * t + (b0 + b1 * t) * xw + (c0 + c1 * t) * xw * xw) +
           pt * pt * (d + e * xw * xw);
}

// Saturation vapour pressure over water, Pa.
double saturation_vapour_pressure(double T)
{
    constexpr double A = 1.2378847e-5, B = -1.9121316e-2, C = 33.93711047, D = -6.3431645e3;
    return std::exp(A * T * T + B * T + C + D / T);
}

} // namespace

AirConditions standard_air() { return {15.0, 101325.0, 0.0, 450.0}; }

AirConditions laboratory_air() { return {24.0, 630.0 * kPascalPerTorr, 0.30, 400.0}; }

void validate(const AirConditions& air)
{
    if (!(air.temperature_c >= -40.0 && air.temperature_c <= 100.0))
        throw DomainError("air temperature outside -40..100 C");
    if (!(air.pressure_pa >= 0.0) || !std::isfinite(air.pressure_pa))
        throw DomainError("air pressure must be non-negative");
    if (!(air.relative_humidity >= 0.0 && air.relative_humidity <= 1.0))
        throw DomainError("relative humidity must be in [0, 1]");
    if (!(air.co2_ppm >= 0.0) || !std::isfinite(air.co2_ppm))
        throw DomainError("CO2 fraction must be non-negative");
}

double ciddor_index(const AirConditions& air, double wavelength)
{
    validate(air);
    if (!(wavelength >= 0.3e-6 && wavelength <= 1.7e-6))
        throw DomainError("wavelength outside the 0.3-1.7 um validity range");
    if (air.pressure_pa == 0.0)
        return 1.0;

    const double p = air.pressure_pa;
    const double t = air.temperature_c;
    const double T = t + 273.15;
    const double xc = air.co2_ppm;

    const double um = wavelength * 1e6;
    const double s2 = 1.0 / (um * um);

    // Standard dry air (15 C, 101325 Pa, 450 ppm) and standard water vapour
    // (20 C, 1333 Pa) refractivities.
    constexpr double k0 = 238.0185, k1 = 5792105.0, k2 = 57.362, k3 = 167917.0;
    constexpr double w0 = 295.235, w1 = 2.6422, w2 = -0.032380, w3 = 0.004028;
    const double n_as = (k1 / (k0 - s2) + k3 / (k2 - s2)) * 1e-8;
    const double n_axs = n_as * (1.0 + 0.534e-6 * (xc - 450.0));
    const double n_ws = 1.022 * (w0 + s2 * (w1 + s2 * (w2 + s2 * w3))) * 1e-8;

    const double f = 1.00062 + 3.14e-8 * p + 5.6e-7 * t * t;
    const double xw = f * air.relative_humidity * saturation_vapour_pressure(T) / p;

    const double molar_air = 1e-3 * (28.9635 + 12.011e-6 * (xc - 400.0));

    const double rho_axs = 101325.0 * molar_air / (compressibility(101325.0, 288.15, 0.0) * kGas * 288.15);
    const double rho_ws = 1333.0 * kMolarWater / (compressibility(1333.0, 293.15, 1.0) * kGas * 293.15);

    const double z = compressibility(p, T, xw);
    const double rho_a = p * molar_air * (1.0 - xw) / (z * kGas * T);
    const double rho_w = p * kMolarWater * xw / (z * kGas * T);

    return 1.0 + (rho_a / rho_axs) * n_axs + (rho_w / rho_ws) * n_ws;
}

double index_change(const AirConditions& air, const WavelengthBand& band)
{
    if (band.empty())
        throw DomainError("empty wavelength band");
    if (band.lo == band.hi)
    {
        ciddor_index(air, band.lo); // still validate
        return 0.0;
    }
    return ciddor_index(air, band.lo) - ciddor_index(air, band.hi);
}

} // namespace combcav
