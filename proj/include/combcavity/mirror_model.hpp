#pragma once

#include "combcavity/numerics.hpp"
#include "combcavity/units.hpp"

#include <complex>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace combcav
{

struct CoatingSample
{
    double wavelength = 0.0;   // m (vacuum)
    double reflectivity = 0.0; // intensity, [0, 1)
    double phase = 0.0;        // rad, reflection phase
};

// Mirror reflectivity R and reflection phase phi_r as functions of optical
// frequency, interpolated with monotone cubics in frequency. Phase samples
// are unwrapped on construction. Queries outside the sampled domain throw.
class CoatingModel
{
public:
    explicit CoatingModel(std::vector<CoatingSample> samples);

    // Frequency-flat coating sampled at `points` wavelengths over `domain`.
    static CoatingModel constant(double reflectivity, double phase, const WavelengthBand& domain,
                                 std::size_t points = 8);

    double reflectivity(double frequency) const;
    double phase(double frequency) const;
    // d(phi_r)/d(frequency), rad/Hz.
    double phase_slope(double frequency) const;

    bool contains(double frequency) const { return domain_.contains(frequency); }
    const FrequencyBand& frequency_domain() const { return domain_; }
    WavelengthBand wavelength_domain() const { return to_wavelength(domain_); }

    // Sorted by increasing wavelength, phase unwrapped.
    const std::vector<CoatingSample>& samples() const { return samples_; }

private:
    void require_inside(double frequency) const;

    std::vector<CoatingSample> samples_;
    FrequencyBand domain_;
    numerics::Pchip reflectivity_;
    numerics::Pchip phase_;
};

// CSV `wavelength_nm,reflectivity,phase_rad`; '#' comment lines allowed.
CoatingModel load_coating(std::istream& in);
CoatingModel load_coating_file(const std::string& path);
void write_coating(std::ostream& out, const CoatingModel& model);

// Removes the least-squares slope of phase versus frequency (the linear
// propagation term). The intercept is kept, so a constant phase is unchanged
// and a phase proportional to frequency becomes zero.
CoatingModel detrend_phase(const CoatingModel& model);

struct Layer
{
    double index = 1.0;     // real refractive index
    double thickness = 0.0; // m
};

// Layers are listed from the incident side toward the substrate.
struct StackDesign
{
    double incident_index = 1.0;
    double substrate_index = 1.5;
    std::vector<Layer> layers;
};

void validate(const StackDesign& design);

struct Reflection
{
    std::complex<double> amplitude; // r
    double reflectivity = 0.0;      // |r|^2
    double phase = 0.0;             // arg r
};

// Normal-incidence characteristic-matrix reflection of a lossless stack.
Reflection stack_reflection(const StackDesign& design, double wavelength);

// (H L)^pairs on the substrate, optionally capped with one more H layer,
// every layer a quarter wave thick at `design_wavelength`.
StackDesign quarter_wave_stack(double high_index, double low_index, int pairs,
                               double design_wavelength, double substrate_index,
                               double incident_index = 1.0, bool high_cap = false);

// Synthetic stand-in for the measured low-dispersion mirrors: a capped
// 5-pair quarter-wave stack on fused silica centred at 910 nm whose high
// index is chosen for a peak reflectivity of 0.992.
StackDesign low_dispersion_stack();

// Samples a stack over `domain` (uniform in frequency) into a CoatingModel.
CoatingModel synthesize_coating(const StackDesign& design, const WavelengthBand& domain,
                                std::size_t points = 2001);

// low_dispersion_stack() sampled over 650-1200 nm.
std::shared_ptr<const CoatingModel> low_dispersion_coating();

// Largest mirror phase excursion keeping half transmission: (1-R)/sqrt(R).
double phase_tolerance(double reflectivity);

} // namespace combcav
