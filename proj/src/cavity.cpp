#include "combcavity/cavity.hpp"
#include "combcavity/csv.hpp"
#include "combcavity/errors.hpp"
#include "combcavity/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace combcav
{

double refractive_index(const Medium& medium, double frequency)
{
    struct Visitor
    {
        double f;
        double operator()(const Vacuum&) const { return 1.0; }
        double operator()(const AirConditions& air) const
        {
            return ciddor_index(air, frequency_to_wavelength(f));
        }
        double operator()(const LinearDispersion& d) const
        {
            return d.index + d.delta_n * (f - d.reference_frequency) / d.reference_frequency;
        }
    };
    return std::visit(Visitor{frequency}, medium);
}

void validate(const Medium& medium)
{
    if (auto air = std::get_if<AirConditions>(&medium))
        validate(*air);
    if (auto d = std::get_if<LinearDispersion>(&medium))
    {
        if (!(d->index > 0.0) || !std::isfinite(d->index))
            throw ValidationError("dispersive medium index must be positive");
        if (!(d->reference_frequency > 0.0))
            throw ValidationError("dispersive medium reference frequency must be positive");
        if (!std::isfinite(d->delta_n))
            throw ValidationError("dispersive medium delta_n must be finite");
    }
}

std::string describe(const Medium& medium)
{
    if (std::holds_alternative<Vacuum>(medium))
        return "vacuum";
    if (auto air = std::get_if<AirConditions>(&medium))
        return "air(T=" + csv::format_double(air->temperature_c) + "C,p=" + csv::format_double(air->pressure_pa) +
               "Pa,RH=" + csv::format_double(air->relative_humidity) + ",CO2=" + csv::format_double(air->co2_ppm) + ")";
    const auto& d = std::get<LinearDispersion>(medium);
    return "linear(n=" + csv::format_double(d.index) + ",f0=" + csv::format_double(d.reference_frequency) +
           ",dn=" + csv::format_double(d.delta_n) + ")";
}

CavitySpec CavitySpec::with_length(double new_length) const
{
    CavitySpec c = *this;
    c.length = new_length;
    return c;
}

void validate(const CavitySpec& cavity)
{
    if (!(cavity.length > 0.0) || !std::isfinite(cavity.length))
        throw ValidationError("cavity length must be positive");
    if (!cavity.coating)
        throw ValidationError("cavity has no coating model");
    if (!(cavity.mirror_radius > 0.0))
        throw ValidationError("mirror radius must be positive");
    if (!(cavity.length < 2.0 * cavity.mirror_radius))
        throw ValidationError("cavity length must be below twice the mirror radius");
    if (cavity.geometric_phase && !std::isfinite(*cavity.geometric_phase))
        throw ValidationError("geometric phase must be finite");
    validate(cavity.medium);
}

double gouy_phase(double length, double mirror_radius)
{
    if (!(mirror_radius > 0.0) || !(length >= 0.0) || !(length <= 2.0 * mirror_radius))
        throw DomainError("Gouy phase needs 0 <= L <= 2r");
    if (std::isinf(mirror_radius))
        return 0.0;
    return 2.0 * std::acos(1.0 - length / mirror_radius);
}

double geometric_phase(const CavitySpec& cavity)
{
    return cavity.geometric_phase ? *cavity.geometric_phase : gouy_phase(cavity.length, cavity.mirror_radius);
}

double round_trip_phase(const CavitySpec& cavity, double frequency)
{
    const double n = refractive_index(cavity.medium, frequency);
    return 2.0 * kTwoPi * n * frequency * cavity.length / kSpeedOfLight + 2.0 * cavity.coating->phase(frequency) +
           geometric_phase(cavity);
}

namespace
{

std::complex<double> field(double r, double theta)
{
    return (1.0 - r) / (1.0 - r * std::polar(1.0, theta));
}

// |E|^2 written to stay accurate near resonance.
double intensity(double r, double theta)
{
    const double s = std::sin(0.5 * theta);
    const double q = 1.0 - r;
    return q * q / (q * q + 4.0 * r * s * s);
}

double nominal_fsr(const CavitySpec& cavity, double frequency)
{
    return kSpeedOfLight / (2.0 * refractive_index(cavity.medium, frequency) * cavity.length);
}

// Resonance of order q near `guess`.
double solve_order(const CavitySpec& cavity, double q, double guess, double tolerance)
{
    const auto& coating = *cavity.coating;
    const auto domain = coating.frequency_domain();
    auto g = [&](double f) { return round_trip_phase(cavity, f) - kTwoPi * q; };

    const double fsr = nominal_fsr(cavity, guess);
    const double r = coating.reflectivity(guess);
    const double fwhm = r > 0.0 ? fsr * (1.0 - r) / (kPi * std::sqrt(r)) : fsr;
    const double step = std::min(0.25 * fwhm, 0.125 * fsr);

    double x = std::clamp(guess - g(guess) / (kTwoPi / fsr), domain.lo, domain.hi);
    double gx = g(x);
    if (gx == 0.0)
        return x;
    const double dir = gx < 0.0 ? 1.0 : -1.0;
    const int max_steps = int(std::ceil(4.0 * fsr / step)) + 16;
    for (int i = 0; i < max_steps; ++i)
    {
        double y = std::clamp(x + dir * step, domain.lo, domain.hi);
        if (y == x)
            break;
        double gy = g(y);
        if (gy == 0.0)
            return y;
        if ((gy > 0.0) != (gx > 0.0))
        {
            double lo = std::min(x, y), hi = std::max(x, y);
            return numerics::bisect(g, lo, hi, tolerance);
        }
        x = y;
        gx = gy;
    }
    throw NumericError("no cavity resonance of order " + csv::format_double(q) + " inside the coating domain");
}

} // namespace

double round_trip_phase_change(const CavitySpec& cavity, double f0, double offset)
{
    const double f = f0 + offset;
    const double n0 = refractive_index(cavity.medium, f0);
    const double n1 = refractive_index(cavity.medium, f);
    const double propagation = n1 * offset + (n1 - n0) * f0;
    return 2.0 * kTwoPi * cavity.length * propagation / kSpeedOfLight +
           2.0 * (cavity.coating->phase(f) - cavity.coating->phase(f0));
}

double airy_transmission(double reflectivity, double theta)
{
    return intensity(reflectivity, theta);
}

std::complex<double> cavity_field(const CavitySpec& cavity, double frequency)
{
    return field(cavity.coating->reflectivity(frequency), round_trip_phase(cavity, frequency));
}

double cavity_transmission(const CavitySpec& cavity, double frequency)
{
    return intensity(cavity.coating->reflectivity(frequency), round_trip_phase(cavity, frequency));
}

double find_resonance(const CavitySpec& cavity, double frequency, double tolerance)
{
    validate(cavity);
    if (!cavity.coating->contains(frequency))
        throw DomainError("frequency " + csv::format_double(frequency) + " Hz outside coating domain");
    const double orders = round_trip_phase(cavity, frequency) / kTwoPi;
    const double q0 = std::floor(orders);
    std::optional<double> best;
    for (double q : {q0, q0 + 1.0})
    {
        try
        {
            double f = solve_order(cavity, q, frequency, tolerance);
            if (!best || std::abs(f - frequency) < std::abs(*best - frequency))
                best = f;
        }
        catch (const NumericError&)
        {
        }
    }
    if (!best)
        throw NumericError("no cavity resonance near " + csv::format_double(frequency) + " Hz");
    return *best;
}

double local_fsr(const CavitySpec& cavity, double frequency)
{
    constexpr double tol = 1e-6;
    const double f0 = find_resonance(cavity, frequency, tol);
    const double q = std::round(round_trip_phase(cavity, f0) / kTwoPi);
    const double fsr = nominal_fsr(cavity, f0);
    std::optional<double> up, down;
    try
    {
        up = solve_order(cavity, q + 1.0, f0 + fsr, tol);
    }
    catch (const NumericError&)
    {
    }
    try
    {
        down = solve_order(cavity, q - 1.0, f0 - fsr, tol);
    }
    catch (const NumericError&)
    {
    }
    if (up && down)
        return 0.5 * (*up - *down);
    if (up)
        return *up - f0;
    if (down)
        return f0 - *down;
    throw NumericError("adjacent resonances fall outside the coating domain");
}

double resonance_fwhm(const CavitySpec& cavity, double frequency)
{
    const double f0 = find_resonance(cavity, frequency, 1e-6);
    const double half = 0.5 * local_fsr(cavity, f0);
    const auto domain = cavity.coating->frequency_domain();
    auto g = [&](double f) { return cavity_transmission(cavity, f) - 0.5; };
    const double hi_end = std::min(f0 + half, domain.hi);
    const double lo_end = std::max(f0 - half, domain.lo);
    if (g(hi_end) >= 0.0 || g(lo_end) >= 0.0)
        throw NumericError("transmission never falls to one half between resonances");
    const double tol = 1e-9 * half;
    return numerics::bisect(g, f0, hi_end, tol) - numerics::bisect(g, lo_end, f0, tol);
}

double nominal_length(double f_rep, int m_filter, const Medium& medium,
                      std::shared_ptr<const CoatingModel> coating, double lock_wavelength, double mirror_radius)
{
    if (!(f_rep > 0.0))
        throw ValidationError("f_rep must be positive");
    if (m_filter < 1)
        throw ValidationError("filter number must be positive");
    if (!coating)
        throw ValidationError("no coating model");
    validate(medium);
    const double nu = wavelength_to_frequency(lock_wavelength);
    if (!coating->contains(nu))
        throw DomainError("lock wavelength outside coating domain");
    const double target = m_filter * f_rep;
    const double n = refractive_index(medium, nu);

    CavitySpec cav{0.0, coating, mirror_radius, LinearDispersion{n, nu, 0.0}, std::nullopt};
    auto fsr_error = [&](double length) { return local_fsr(cav.with_length(length), nu) - target; };

    double l0 = kSpeedOfLight * (kTwoPi / target - 2.0 * coating->phase_slope(nu)) / (2.0 * kTwoPi * n);
    if (!(l0 > 0.0) || !(l0 < 2.0 * mirror_radius))
        throw NumericError("no cavity length in (0, 2r) gives the requested resonance spacing");

    double h0 = fsr_error(l0);
    double l1 = l0 * (1.0 + 1e-6);
    double h1 = fsr_error(l1);
    double best = std::abs(h0) <= std::abs(h1) ? l0 : l1;
    double best_h = std::min(std::abs(h0), std::abs(h1));
    for (int it = 0; it < 40 && h1 != h0; ++it)
    {
        double l2 = l1 - h1 * (l1 - l0) / (h1 - h0);
        if (!(l2 > 0.0) || !(l2 < 2.0 * mirror_radius))
            break;
        l0 = l1;
        h0 = h1;
        l1 = l2;
        h1 = fsr_error(l1);
        if (std::abs(h1) < best_h)
        {
            best = l1;
            best_h = std::abs(h1);
        }
        if (std::abs(l1 - l0) <= 4.0 * std::numeric_limits<double>::epsilon() * l1 || h1 == 0.0)
            break;
    }
    if (best_h > 1e-6 * target)
        throw NumericError("resonance-spacing solve did not converge");
    return best;
}

void validate(const LockConfig& lock, const CoatingModel& coating)
{
    if (lock.m_filter < 2)
        throw ValidationError("filter number m must be at least 2");
    if (!(lock.filter_width > 0.0))
        throw ValidationError("filter width must be positive");
    if (!(lock.search_halfwidth >= 0.0))
        throw ValidationError("search half-width must be non-negative");
    const auto band = to_frequency(lock.filter_band());
    if (!(band.lo > 0.0) || !coating.contains(band.lo) || !coating.contains(band.hi))
        throw DomainError("filter band lies outside the coating domain");
}

LockResult lock_cavity(const CombSpec& comb, const CavitySpec& cavity, const LockConfig& lock,
                       std::optional<double> center_length)
{
    validate(cavity);
    validate(lock, *cavity.coating);
    // Band edges ramp linearly over m f_rep, so every tooth residue carries the
    // same total weight and the optimum does not depend on mode counting.
    const auto band = to_frequency(lock.filter_band());
    const double ramp = lock.m_filter * comb.f_rep();
    const auto domain = cavity.coating->frequency_domain();
    const auto modes = sample_comb(
        comb, {std::max(band.lo - 0.5 * ramp, domain.lo), std::min(band.hi + 0.5 * ramp, domain.hi)});
    if (modes.empty() || sample_comb(comb, band).empty())
        throw ValidationError("no comb modes inside the lock filter band");

    struct Term
    {
        double power, r, k, phase;
    };
    std::vector<Term> terms;
    terms.reserve(modes.size());
    double r_max = 0.0;
    for (const auto& m : modes)
    {
        const double r = cavity.coating->reflectivity(m.frequency);
        const double n = refractive_index(cavity.medium, m.frequency);
        const double cover = std::min(m.frequency + 0.5 * ramp, band.hi) - std::max(m.frequency - 0.5 * ramp, band.lo);
        if (!(cover > 0.0))
            continue;
        terms.push_back({std::norm(m.amplitude) * cover / ramp, r, 2.0 * kTwoPi * n * m.frequency / kSpeedOfLight,
                         2.0 * cavity.coating->phase(m.frequency)});
        r_max = std::max(r_max, r);
    }

    const double nu_c = wavelength_to_frequency(lock.filter_center);
    const double center = center_length ? *center_length
                                        : nominal_length(comb.f_rep(), lock.m_filter, cavity.medium,
                                                         cavity.coating, lock.filter_center, cavity.mirror_radius);
    const double period = 0.5 * lock.filter_center / refractive_index(cavity.medium, nu_c);
    const double halfwidth = lock.search_halfwidth > 0.0 ? lock.search_halfwidth : 0.5 * period;
    if (!(center - halfwidth > 0.0) || !(center + halfwidth < 2.0 * cavity.mirror_radius))
        throw ValidationError("lock search window leaves the stable length range");

    auto objective = [&](double length) {
        const double gouy = cavity.geometric_phase ? *cavity.geometric_phase
                                                   : gouy_phase(length, cavity.mirror_radius);
        double sum = 0.0;
        for (const auto& t : terms)
            sum += t.power * intensity(t.r, t.k * length + t.phase + gouy);
        return sum;
    };

    const double finesse_width = r_max > 0.0 ? period * (1.0 - r_max) / (kPi * std::sqrt(r_max)) : period;
    const double step_target = finesse_width / 16.0;
    const std::size_t points =
        std::clamp<std::size_t>(std::size_t(std::ceil(2.0 * halfwidth / step_target)) + 1, 65, 4000001);
    const double step = 2.0 * halfwidth / double(points - 1);
    std::vector<double> grid(points), value(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        grid[i] = center - halfwidth + step * double(i);
        value[i] = objective(grid[i]);
    }
    const auto [lo_it, hi_it] = std::minmax_element(value.begin(), value.end());
    const double top = *hi_it;
    if (!(top > 0.0))
        throw NumericError("lock objective is zero everywhere: nothing transmitted in the filter band");

    LockResult out{center, objective(center), sample_comb(comb, band).size(), center, halfwidth};
    if (top - *lo_it <= 1e-12 * top)
        return out;

    out.objective = -1.0;
    for (std::size_t i = 0; i < points; ++i)
    {
        const bool left_ok = i == 0 || value[i] >= value[i - 1];
        const bool right_ok = i + 1 == points || value[i] > value[i + 1];
        if (!left_ok || !right_ok || value[i] < 0.5 * top)
            continue;
        const double a = grid[i == 0 ? 0 : i - 1];
        const double b = grid[i + 1 == points ? i : i + 1];
        const double x = numerics::golden_section_max(objective, a, b, 1e-15);
        const double v = objective(x);
        if (v > out.objective)
        {
            out.objective = v;
            out.length = x;
        }
    }
    return out;
}

double comb_step_length(const CavitySpec& cavity, double f_rep, double frequency)
{
    return cavity.length * f_rep / frequency;
}

double delta_nu_cc(const CombSpec& comb, const CavitySpec& cavity, double frequency)
{
    const double f = mode_frequency(comb, nearest_mode(comb, frequency));
    return find_resonance(cavity, f) - f;
}

} // namespace combcav
