#pragma once

#include "combcavity/cavity.hpp"

#include <complex>
#include <vector>

namespace combcav
{

struct FilteredMode
{
    ModeIndex index = 0;
    double frequency = 0.0;             // Hz
    std::complex<double> input{};       // incident amplitude
    std::complex<double> transfer{};    // cavity field E at this mode

    std::complex<double> output() const { return input * transfer; }
    double input_power() const { return std::norm(input); }
    double output_power() const { return std::norm(input * transfer); }
    double transmission() const { return std::norm(transfer); }
};

struct FilteredSpectrum
{
    std::vector<FilteredMode> modes; // strictly increasing index
    int m_filter = 0;
    ModeIndex passed_residue = 0;    // passed modes have index = residue (mod m)
    double lock_wavelength = 0.0;    // m
    double locked_length = 0.0;      // m

    bool is_passed(ModeIndex n) const;
    std::vector<FilteredMode> passed() const;
};

// Locks the cavity and applies it to every comb mode inside the coating domain.
FilteredSpectrum filter_comb(const CombSpec& comb, const CavitySpec& cavity, const LockConfig& lock,
                             std::optional<double> center_length = std::nullopt);

// Applies the cavity at its stated length to the comb modes in `band`.
// The passed residue is that of the mode nearest `reference_frequency`.
FilteredSpectrum apply_cavity(const CombSpec& comb, const CavitySpec& cavity, const FrequencyBand& band,
                              int m_filter, double reference_frequency);

// Largest contiguous wavelength interval containing the passed mode nearest
// the lock wavelength where passed-mode transmission >= threshold. Empty
// (lo > hi) when that mode itself is below threshold.
WavelengthBand usable_bandwidth(const FilteredSpectrum& spectrum, double threshold = 0.5);

// m lambda^2 f_rep sqrt((R-1)^2/R) / (pi c delta_n).
double bandwidth_closed_form(int m, double wavelength, double f_rep, double reflectivity, double delta_n);

// Closed-form intensity ratio (dB) of the comb mode k steps from a passed mode
// whose resonance offset is delta_nu_cc.
double suppression_closed_form(double reflectivity, int m, int k, double delta_nu_cc, double f_rep);

struct Suppression
{
    double nnl_db = 0.0; // neighbour at index - 1
    double nnr_db = 0.0; // neighbour at index + 1
    double passed_transmission = 0.0;
    ModeIndex passed_index = 0;
};

// Envelope-weighted output power of the neighbours of the passed mode nearest
// `probe_frequency`, relative to that mode.
Suppression heterodyne_suppression(const FilteredSpectrum& spectrum, double probe_frequency);

struct SuppressionRecord
{
    double lock_wavelength = 0.0; // m
    double locked_length = 0.0;   // m
    Suppression suppression;
};

// Re-locks at each wavelength and probes the passed mode there.
std::vector<SuppressionRecord> suppression_scan(const CombSpec& comb, const CavitySpec& cavity,
                                                const LockConfig& lock,
                                                const std::vector<double>& lock_wavelengths);

struct BeatLine
{
    int harmonic = 0;         // j, beat at j f_rep
    double power = 0.0;       // |sum E_N conj(E_{N+j})|^2
    double normalized = 0.0;  // power / power at j = m (raw when that is zero)
    double pairwise_bound = 0.0; // (sum |E_N||E_{N+j}|)^2
};

// Beat powers for j = 1..max_harmonic between output amplitudes.
std::vector<BeatLine> rf_beat_spectrum(const FilteredSpectrum& spectrum, int max_harmonic);

struct OffsetScanPoint
{
    double shift = 0.0;              // comb translation applied through f_o, Hz
    double locked_length = 0.0;      // m
    double center_transmission = 0.0;// mean passed-mode transmission in the analysis band
    double peak_transmission = 0.0;  // largest passed-mode transmission
    WavelengthBand bandwidth;        // usable 50 % band
};

struct OffsetScanOptions
{
    double analysis_width = 50e-9; // m, band centred on the lock wavelength
    double threshold = 0.5;
};

// Translates the comb by each shift, re-locks on the branch of the unshifted
// lock (window of one comb step in length) and records the locked state. The
// comb offset is first aligned so an unshifted mode sits on resonance at the
// lock wavelength.
std::vector<OffsetScanPoint> offset_scan(const CombSpec& comb, const CavitySpec& cavity, const LockConfig& lock,
                                         const std::vector<double>& shifts, OffsetScanOptions options = {});

// Centroid shift of a Gaussian comb line of the given FWHM after filtering by
// the cavity resonance nearest `mode_frequency`, with the line sitting
// delta_nu_cc below the resonance. Zero for zero linewidth.
double cog_shift(double linewidth_fwhm, const CavitySpec& cavity, double mode_frequency, double delta_nu_cc,
                 double tolerance = 1.0);

} // namespace combcav
