#pragma once

#include "combcavity/units.hpp"

namespace combcav
{

inline constexpr double kPascalPerTorr = 101325.0 / 760.0;

struct AirConditions
{
    double temperature_c = 15.0;      // degrees Celsius, -40..100
    double pressure_pa = 101325.0;    // >= 0
    double relative_humidity = 0.0;   // fraction, 0..1
    double co2_ppm = 450.0;           // umol/mol, >= 0
};

// 15 C, 101325 Pa, dry, 450 ppm CO2.
AirConditions standard_air();
// 24 C, 630 Torr, 30 % humidity, 400 ppm CO2.
AirConditions laboratory_air();

void validate(const AirConditions& air);

// Phase refractive index of moist air by the Ciddor procedure.
// `wavelength` is the vacuum wavelength in metres, valid over 0.3-1.7 um.
// Returns exactly 1 at zero pressure.
double ciddor_index(const AirConditions& air, double wavelength);

// n(band.lo) - n(band.hi).
double index_change(const AirConditions& air, const WavelengthBand& band);

} // namespace combcav
