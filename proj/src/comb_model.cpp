#include "combcavity/comb_model.hpp"
#include "combcavity/csv.hpp"
#include "combcavity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace combcav
{

Envelope Envelope::flat(double power)
{
    if (!(power >= 0.0) || !std::isfinite(power))
        throw DomainError("envelope level must be finite and non-negative");
    Envelope e;
    e.flat_level_ = power;
    return e;
}

Envelope Envelope::from_samples(std::vector<Sample> samples)
{
    if (samples.size() < 2)
        throw ValidationError("envelope needs at least two samples");
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.frequency < b.frequency; });
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        if (!(samples[i].power >= 0.0) || !std::isfinite(samples[i].power))
            throw ValidationError("envelope power must be finite and non-negative");
        if (i > 0 && !(samples[i].frequency > samples[i - 1].frequency))
            throw ValidationError("envelope frequencies must be distinct");
    }
    Envelope e;
    e.samples_ = std::move(samples);
    return e;
}

double Envelope::power(double frequency) const
{
    if (samples_.empty())
        return flat_level_;
    if (frequency < samples_.front().frequency || frequency > samples_.back().frequency)
        return 0.0;
    auto hi = std::lower_bound(samples_.begin(), samples_.end(), frequency,
                               [](const Sample& s, double f) { return s.frequency < f; });
    if (hi == samples_.begin())
        return hi->power;
    auto lo = hi - 1;
    double t = (frequency - lo->frequency) / (hi->frequency - lo->frequency);
    return lo->power + t * (hi->power - lo->power);
}

FrequencyBand Envelope::domain() const
{
    if (samples_.empty())
        return {-INFINITY, INFINITY};
    return {samples_.front().frequency, samples_.back().frequency};
}

Envelope load_envelope(std::istream& in)
{
    auto table = csv::read_numeric(in);
    csv::expect_header(table, {"wavelength_nm", "power"});
    std::vector<Envelope::Sample> samples;
    double previous = -INFINITY;
    for (const auto& row : table.rows)
    {
        double wl_nm = row.values[0];
        if (!(wl_nm > previous))
            throw ParseError("wavelengths must be strictly increasing", row.line);
        if (!(wl_nm > 0.0))
            throw ParseError("wavelength must be positive", row.line);
        if (!(row.values[1] >= 0.0))
            throw ParseError("power must be non-negative", row.line);
        previous = wl_nm;
        samples.push_back({wavelength_to_frequency(wl_nm * 1e-9), row.values[1]});
    }
    return Envelope::from_samples(std::move(samples));
}

Envelope load_envelope_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open envelope file '" + path + "'");
    return load_envelope(in);
}

CombSpec::CombSpec(double f_rep, double f_o, ModeIndex n_min, ModeIndex n_max, Envelope envelope,
                   double linewidth_fwhm)
    : f_rep_(f_rep), f_o_(f_o), n_min_(n_min), n_max_(n_max), envelope_(std::move(envelope)),
      linewidth_(linewidth_fwhm)
{
    if (!(f_rep > 0.0) || !std::isfinite(f_rep))
        throw DomainError("f_rep must be positive");
    if (!(f_o >= 0.0 && f_o < f_rep))
        throw DomainError("f_o must lie in [0, f_rep)");
    if (n_min > n_max)
        throw RangeError("n_min must not exceed n_max");
    if (!(linewidth_fwhm >= 0.0) || !std::isfinite(linewidth_fwhm))
        throw DomainError("linewidth must be finite and non-negative");
    if (!envelope_.is_flat())
    {
        auto dom = envelope_.domain();
        // One ULP of slack: the edges usually come from the same nm table.
        auto slack = [](double f) { return std::nextafter(f, INFINITY) - f; };
        double f_lo = mode_frequency(*this, n_min);
        double f_hi = mode_frequency(*this, n_max);
        if (dom.lo > f_lo + slack(f_lo) || dom.hi < f_hi - slack(f_hi))
            throw RangeError("envelope does not cover the comb's mode range");
    }
}

CombSpec CombSpec::covering(double f_rep, double f_o, const FrequencyBand& band, Envelope envelope,
                            double linewidth_fwhm)
{
    if (band.empty())
        throw RangeError("empty comb band");
    auto n_lo = static_cast<ModeIndex>(std::floor((band.lo - f_o) / f_rep));
    auto n_hi = static_cast<ModeIndex>(std::ceil((band.hi - f_o) / f_rep));
    if (!envelope.is_flat())
    {
        // Trim to the envelope domain so the coverage invariant holds.
        auto dom = envelope.domain();
        while (n_lo <= n_hi && std::fma(double(n_lo), f_rep, f_o) < dom.lo)
            ++n_lo;
        while (n_hi >= n_lo && std::fma(double(n_hi), f_rep, f_o) > dom.hi)
            --n_hi;
    }
    return CombSpec(f_rep, f_o, n_lo, n_hi, std::move(envelope), linewidth_fwhm);
}

FrequencyBand CombSpec::span() const
{
    return {mode_frequency(*this, n_min_), mode_frequency(*this, n_max_)};
}

CombSpec CombSpec::translated(double shift) const
{
    double raw = f_o_ + shift;
    double wraps = std::floor(raw / f_rep_);
    double f_o = raw - wraps * f_rep_;
    if (f_o >= f_rep_) // rounding at the wrap point
    {
        f_o -= f_rep_;
        wraps += 1.0;
    }
    auto k = static_cast<ModeIndex>(wraps);
    // Keep the same frequency coverage: modes move up by `shift`, so the
    // mode that used to be N is now N + k with the new offset.
    CombSpec out = *this;
    out.f_o_ = f_o < 0.0 ? 0.0 : f_o;
    out.n_min_ = n_min_ + k;
    out.n_max_ = n_max_ + k;
    if (!envelope_.is_flat())
    {
        auto dom = envelope_.domain();
        while (out.n_min_ <= out.n_max_ && mode_frequency(out, out.n_min_) < dom.lo)
            ++out.n_min_;
        while (out.n_max_ >= out.n_min_ && mode_frequency(out, out.n_max_) > dom.hi)
            --out.n_max_;
    }
    return out;
}

double mode_frequency(const CombSpec& spec, ModeIndex n)
{
    if (n < spec.n_min() || n > spec.n_max())
        throw RangeError("mode index " + std::to_string(n) + " outside comb range");
    return std::fma(static_cast<double>(n), spec.f_rep(), spec.f_o());
}

ModeIndex nearest_mode(const CombSpec& spec, double frequency)
{
    auto n = static_cast<ModeIndex>(std::llround((frequency - spec.f_o()) / spec.f_rep()));
    return std::clamp(n, spec.n_min(), spec.n_max());
}

std::vector<ModeField> sample_comb(const CombSpec& spec, const FrequencyBand& band)
{
    std::vector<ModeField> out;
    if (!(band.hi > band.lo))
        return out;
    auto lo = static_cast<ModeIndex>(std::ceil((band.lo - spec.f_o()) / spec.f_rep())) - 1;
    auto hi = static_cast<ModeIndex>(std::floor((band.hi - spec.f_o()) / spec.f_rep())) + 1;
    lo = std::max(lo, spec.n_min());
    hi = std::min(hi, spec.n_max());
    if (lo > hi)
        return out;
    out.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (ModeIndex n = lo; n <= hi; ++n)
    {
        double f = mode_frequency(spec, n);
        if (f < band.lo || f >= band.hi)
            continue;
        out.push_back({n, f, {std::sqrt(spec.envelope().power(f)), 0.0}});
    }
    return out;
}

double gaussian_line(double delta, double fwhm)
{
    if (!(fwhm > 0.0))
        throw DomainError("gaussian_line requires fwhm > 0");
    double x = delta / fwhm;
    return std::exp(-4.0 * std::numbers::ln2 * x * x);
}

} // namespace combcav
