#include "combcavity/filter_analysis.hpp"
#include "combcavity/csv.hpp"
#include "combcavity/errors.hpp"
#include "combcavity/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace combcav
{

namespace
{

ModeIndex positive_mod(ModeIndex a, ModeIndex m)
{
    ModeIndex r = a % m;
    return r < 0 ? r + m : r;
}

FrequencyBand intersect(const FrequencyBand& a, const FrequencyBand& b)
{
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

// Position of the mode closest to `frequency` in a frequency-sorted list.
std::size_t closest(const std::vector<FilteredMode>& modes, double frequency)
{
    auto it = std::lower_bound(modes.begin(), modes.end(), frequency,
                               [](const FilteredMode& m, double f) { return m.frequency < f; });
    std::size_t i = std::size_t(it - modes.begin());
    if (i == modes.size())
        return i - 1;
    if (i > 0 && frequency - modes[i - 1].frequency <= modes[i].frequency - frequency)
        return i - 1;
    return i;
}

} // namespace

bool FilteredSpectrum::is_passed(ModeIndex n) const
{
    return positive_mod(n, m_filter) == passed_residue;
}

std::vector<FilteredMode> FilteredSpectrum::passed() const
{
    std::vector<FilteredMode> out;
    for (const auto& m : modes)
        if (is_passed(m.index))
            out.push_back(m);
    return out;
}

FilteredSpectrum apply_cavity(const CombSpec& comb, const CavitySpec& cavity, const FrequencyBand& band,
                              int m_filter, double reference_frequency)
{
    validate(cavity);
    if (m_filter < 1)
        throw ValidationError("filter number must be positive");
    const auto span = intersect(band, cavity.coating->frequency_domain());
    FilteredSpectrum out;
    out.m_filter = m_filter;
    out.lock_wavelength = frequency_to_wavelength(reference_frequency);
    out.locked_length = cavity.length;
    if (span.empty())
        return out;
    for (const auto& m : sample_comb(comb, span))
        out.modes.push_back({m.index, m.frequency, m.amplitude, cavity_field(cavity, m.frequency)});
    if (out.modes.empty())
        return out;

    // Passed residue: best-transmitted mode among the m modes around the reference.
    const std::size_t c = closest(out.modes, reference_frequency);
    const std::size_t lo = c >= std::size_t(m_filter / 2) ? c - std::size_t(m_filter / 2) : 0;
    const std::size_t hi = std::min(out.modes.size(), lo + std::size_t(m_filter));
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i)
        if (out.modes[i].transmission() > out.modes[best].transmission())
            best = i;
    out.passed_residue = positive_mod(out.modes[best].index, m_filter);
    return out;
}

FilteredSpectrum filter_comb(const CombSpec& comb, const CavitySpec& cavity, const LockConfig& lock,
                             std::optional<double> center_length)
{
    const auto result = lock_cavity(comb, cavity, lock, center_length);
    auto out = apply_cavity(comb, cavity.with_length(result.length), cavity.coating->frequency_domain(),
                            lock.m_filter, wavelength_to_frequency(lock.filter_center));
    out.lock_wavelength = lock.filter_center;
    return out;
}

WavelengthBand usable_bandwidth(const FilteredSpectrum& spectrum, double threshold)
{
    const auto passed = spectrum.passed();
    if (passed.empty())
        throw ValidationError("spectrum has no passed modes");
    const WavelengthBand none{1.0, 0.0};
    const std::size_t c = closest(passed, wavelength_to_frequency(spectrum.lock_wavelength));
    if (passed[c].transmission() < threshold)
        return none;
    std::size_t lo = c, hi = c;
    while (lo > 0 && passed[lo - 1].transmission() >= threshold)
        --lo;
    while (hi + 1 < passed.size() && passed[hi + 1].transmission() >= threshold)
        ++hi;
    return {frequency_to_wavelength(passed[hi].frequency), frequency_to_wavelength(passed[lo].frequency)};
}

double bandwidth_closed_form(int m, double wavelength, double f_rep, double reflectivity, double delta_n)
{
    if (!(delta_n > 0.0))
        throw DomainError("delta_n must be positive");
    if (!(reflectivity > 0.0 && reflectivity < 1.0))
        throw DomainError("reflectivity must lie in (0, 1)");
    if (m < 1 || !(wavelength > 0.0) || !(f_rep > 0.0))
        throw DomainError("m, wavelength and f_rep must be positive");
    return m * wavelength * wavelength * f_rep * std::sqrt((reflectivity - 1.0) * (reflectivity - 1.0) / reflectivity) /
           (kPi * kSpeedOfLight * delta_n);
}

double suppression_closed_form(double reflectivity, int m, int k, double delta_nu_cc, double f_rep)
{
    if (!(reflectivity > 0.0 && reflectivity < 1.0))
        throw DomainError("reflectivity must lie in (0, 1)");
    if (m < 2)
        throw DomainError("filter number must be at least 2");
    if (!(f_rep > 0.0))
        throw DomainError("f_rep must be positive");
    const double r = reflectivity;
    const double x = delta_nu_cc / (m * f_rep);
    const double num = r * r - 2.0 * r * std::cos(kTwoPi * x) + 1.0;
    const double den = r * r - 2.0 * r * std::cos(kTwoPi * (x + double(k) / m)) + 1.0;
    return 10.0 * std::log10(num / den);
}

Suppression heterodyne_suppression(const FilteredSpectrum& spectrum, double probe_frequency)
{
    const auto& modes = spectrum.modes;
    if (modes.size() < 3)
        throw RangeError("spectrum too short for neighbour suppression");
    const double spacing = (modes.back().frequency - modes.front().frequency) /
                           double(modes.back().index - modes.front().index);
    if (probe_frequency < modes.front().frequency - spacing || probe_frequency > modes.back().frequency + spacing)
        throw RangeError("probe frequency outside the filtered spectrum");

    const std::size_t c = closest(modes, probe_frequency);
    std::optional<std::size_t> pick;
    for (std::size_t i = c >= std::size_t(spectrum.m_filter) ? c - spectrum.m_filter : 0;
         i < std::min(modes.size(), c + spectrum.m_filter + 1); ++i)
        if (spectrum.is_passed(modes[i].index) &&
            (!pick || std::abs(modes[i].frequency - probe_frequency) <
                          std::abs(modes[*pick].frequency - probe_frequency)))
            pick = i;
    if (!pick || *pick == 0 || *pick + 1 >= modes.size())
        throw RangeError("no passed mode with both neighbours near the probe");
    const auto& p = modes[*pick];
    const auto& left = modes[*pick - 1];
    const auto& right = modes[*pick + 1];
    if (left.index != p.index - 1 || right.index != p.index + 1)
        throw RangeError("neighbouring modes missing from the spectrum");
    const double ref = p.output_power();
    if (!(ref > 0.0))
        throw NumericError("passed mode carries no power");
    return {10.0 * std::log10(left.output_power() / ref), 10.0 * std::log10(right.output_power() / ref),
            p.transmission(), p.index};
}

std::vector<SuppressionRecord> suppression_scan(const CombSpec& comb, const CavitySpec& cavity,
                                                const LockConfig& lock,
                                                const std::vector<double>& lock_wavelengths)
{
    std::vector<SuppressionRecord> out;
    out.reserve(lock_wavelengths.size());
    for (double wl : lock_wavelengths)
    {
        LockConfig l = lock;
        l.filter_center = wl;
        const auto locked = lock_cavity(comb, cavity, l);
        const double nu = wavelength_to_frequency(wl);
        const double margin = 2.0 * l.m_filter * comb.f_rep();
        const auto spec = apply_cavity(comb, cavity.with_length(locked.length),
                                       {nu - margin, nu + margin}, l.m_filter, nu);
        out.push_back({wl, locked.length, heterodyne_suppression(spec, nu)});
    }
    return out;
}

std::vector<BeatLine> rf_beat_spectrum(const FilteredSpectrum& spectrum, int max_harmonic)
{
    const auto& modes = spectrum.modes;
    if (max_harmonic < 0)
        throw RangeError("max harmonic must be non-negative");
    if (std::size_t(max_harmonic) >= std::max<std::size_t>(modes.size(), 1))
        throw RangeError("max harmonic must be below the mode count");

    std::vector<std::complex<double>> amp;
    amp.reserve(modes.size());
    for (const auto& m : modes)
        amp.push_back(m.output());
    auto partner = [&](std::size_t i, int j) -> std::optional<std::size_t> {
        const ModeIndex want = modes[i].index + j;
        if (i + j < modes.size() && modes[i + j].index == want)
            return i + j;
        auto it = std::lower_bound(modes.begin() + i, modes.end(), want,
                                   [](const FilteredMode& m, ModeIndex n) { return m.index < n; });
        if (it != modes.end() && it->index == want)
            return std::size_t(it - modes.begin());
        return std::nullopt;
    };
    auto beat = [&](int j) {
        std::complex<double> sum = 0.0;
        double bound = 0.0;
        for (std::size_t i = 0; i < modes.size(); ++i)
            if (auto k = partner(i, j))
            {
                sum += amp[i] * std::conj(amp[*k]);
                bound += std::abs(amp[i]) * std::abs(amp[*k]);
            }
        return std::pair{std::norm(sum), bound * bound};
    };

    double reference = 0.0;
    if (spectrum.m_filter > 0 && std::size_t(spectrum.m_filter) < modes.size())
        reference = beat(spectrum.m_filter).first;
    std::vector<BeatLine> out;
    for (int j = 1; j <= max_harmonic; ++j)
    {
        auto [power, bound] = beat(j);
        out.push_back({j, power, reference > 0.0 ? power / reference : power, bound});
    }
    return out;
}

std::vector<OffsetScanPoint> offset_scan(const CombSpec& comb, const CavitySpec& cavity, const LockConfig& lock,
                                         const std::vector<double>& shifts, OffsetScanOptions options)
{
    validate(cavity);
    validate(lock, *cavity.coating);
    const double nu = wavelength_to_frequency(lock.filter_center);
    const double l0 = nominal_length(comb.f_rep(), lock.m_filter, cavity.medium, cavity.coating,
                                     lock.filter_center, cavity.mirror_radius);
    const auto cav0 = cavity.with_length(l0);
    const double resonance = find_resonance(cav0, nu);
    const CombSpec base = comb.translated(resonance - mode_frequency(comb, nearest_mode(comb, resonance)));

    LockConfig branch = lock;
    branch.search_halfwidth = 0.5 * comb_step_length(cav0, comb.f_rep(), nu);
    const auto analysis = to_frequency(WavelengthBand{lock.filter_center - 0.5 * options.analysis_width,
                                                      lock.filter_center + 0.5 * options.analysis_width});

    std::vector<OffsetScanPoint> out;
    out.reserve(shifts.size());
    for (double shift : shifts)
    {
        const CombSpec shifted = base.translated(shift);
        const auto locked = lock_cavity(shifted, cavity, branch, l0);
        auto spec = apply_cavity(shifted, cavity.with_length(locked.length), cavity.coating->frequency_domain(),
                                 lock.m_filter, nu);
        spec.lock_wavelength = lock.filter_center;

        OffsetScanPoint p{shift, locked.length, 0.0, 0.0, {1.0, 0.0}};
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& m : spec.passed())
        {
            p.peak_transmission = std::max(p.peak_transmission, m.transmission());
            if (analysis.contains(m.frequency))
            {
                sum += m.transmission();
                ++count;
            }
        }
        p.center_transmission = count ? sum / double(count) : 0.0;
        p.bandwidth = usable_bandwidth(spec, options.threshold);
        out.push_back(p);
    }
    return out;
}

double cog_shift(double linewidth_fwhm, const CavitySpec& cavity, double mode_frequency, double delta_nu_cc,
                 double tolerance)
{
    if (!(linewidth_fwhm >= 0.0) || !std::isfinite(linewidth_fwhm))
        throw DomainError("linewidth must be non-negative");
    if (!std::isfinite(delta_nu_cc))
        throw DomainError("delta_nu_cc must be finite");
    if (!(tolerance > 0.0))
        throw DomainError("tolerance must be positive");
    if (linewidth_fwhm == 0.0)
        return 0.0;

    const double resonance = find_resonance(cavity, mode_frequency, 1e-6);
    const double fwhm = resonance_fwhm(cavity, resonance);
    const double theta_r = round_trip_phase(cavity, resonance);
    const double residual = theta_r - kTwoPi * std::round(theta_r / kTwoPi);

    // x is the detuning from the unfiltered line centre; the resonance sits at x = delta_nu_cc.
    const double a = std::min(-8.0 * linewidth_fwhm, delta_nu_cc - 8.0 * fwhm);
    const double b = std::max(8.0 * linewidth_fwhm, delta_nu_cc + 8.0 * fwhm);
    const double feature = 0.5 * std::min(linewidth_fwhm, fwhm);
    const std::size_t panels = std::clamp<std::size_t>(std::size_t(std::ceil((b - a) / feature)), 1, 20000);
    const double width = (b - a) / double(panels);

    auto weight = [&](double x) {
        const double y = x - delta_nu_cc; // offset from the resonance
        const double t = airy_transmission(cavity.coating->reflectivity(resonance + y),
                                           residual + round_trip_phase_change(cavity, resonance, y));
        return gaussian_line(x, linewidth_fwhm) * t;
    };
    auto integrate = [&](const std::function<double(double)>& f, double tol) {
        double sum = 0.0;
        for (std::size_t i = 0; i < panels; ++i)
        {
            const double lo = a + width * double(i);
            const double hi = i + 1 == panels ? b : lo + width;
            sum += numerics::adaptive_simpson(f, lo, hi, tol / double(panels));
        }
        return sum;
    };

    double rough = 0.0;
    for (std::size_t i = 0; i < panels; ++i)
        rough += weight(a + width * (double(i) + 0.5)) * width;
    if (!(rough > 0.0))
        throw NumericError("filtered line carries no power");
    const double denom = integrate(weight, 1e-9 * rough);
    const double numer = integrate([&](double x) { return x * weight(x); }, 0.5 * tolerance * rough);
    return numer / denom;
}

} // namespace combcav
