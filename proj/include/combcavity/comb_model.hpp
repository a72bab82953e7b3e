#pragma once

#include "combcavity/units.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace combcav
{

using ModeIndex = std::int64_t;

// Spectral power density of the laser versus optical frequency.
// Piecewise linear between samples and zero outside them; the flat
// envelope has no domain and returns its level everywhere.
class Envelope
{
public:
    struct Sample
    {
        double frequency = 0.0; // Hz
        double power = 0.0;     // arbitrary units, >= 0
    };

    static Envelope flat(double power = 1.0);
    static Envelope from_samples(std::vector<Sample> samples);

    double power(double frequency) const;

    bool is_flat() const { return samples_.empty(); }
    // Only meaningful when !is_flat().
    FrequencyBand domain() const;
    const std::vector<Sample>& samples() const { return samples_; }

private:
    std::vector<Sample> samples_;
    double flat_level_ = 1.0;
};

// Two-column CSV `wavelength_nm,power`, header row required, wavelengths
// strictly increasing.
Envelope load_envelope(std::istream& in);
Envelope load_envelope_file(const std::string& path);

// Comb law f_N = N f_rep + f_o over N in [n_min, n_max].
class CombSpec
{
public:
    CombSpec(double f_rep, double f_o, ModeIndex n_min, ModeIndex n_max,
             Envelope envelope = Envelope::flat(), double linewidth_fwhm = 0.0);

    // Smallest index range whose modes cover [band.lo, band.hi].
    static CombSpec covering(double f_rep, double f_o, const FrequencyBand& band,
                             Envelope envelope = Envelope::flat(), double linewidth_fwhm = 0.0);

    double f_rep() const { return f_rep_; }
    double f_o() const { return f_o_; }
    ModeIndex n_min() const { return n_min_; }
    ModeIndex n_max() const { return n_max_; }
    const Envelope& envelope() const { return envelope_; }
    double linewidth_fwhm() const { return linewidth_; }
    FrequencyBand span() const;

    // Same frequency coverage with every mode translated by `shift` Hz.
    // The offset is re-wrapped into [0, f_rep) and the index range follows.
    CombSpec translated(double shift) const;

private:
    double f_rep_;
    double f_o_;
    ModeIndex n_min_;
    ModeIndex n_max_;
    Envelope envelope_;
    double linewidth_;
};

struct ModeField
{
    ModeIndex index = 0;
    double frequency = 0.0;             // Hz
    std::complex<double> amplitude{};   // sqrt(envelope power), zero phase
};

double mode_frequency(const CombSpec& spec, ModeIndex n);

// Index of the mode closest to `frequency`, clamped to the comb range.
ModeIndex nearest_mode(const CombSpec& spec, double frequency);

// Modes with frequency in the half-open interval [band.lo, band.hi).
std::vector<ModeField> sample_comb(const CombSpec& spec, const FrequencyBand& band);

// Unit-peak Gaussian line profile in detuning with the given FWHM.
double gaussian_line(double delta, double fwhm);

} // namespace combcav
