#include "combcavity/mirror_model.hpp"
#include "combcavity/csv.hpp"
#include "combcavity/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

namespace combcav
{

CoatingModel::CoatingModel(std::vector<CoatingSample> samples) : samples_(std::move(samples))
{
    if (samples_.size() < 4)
        throw ValidationError("coating table needs at least 4 samples for cubic interpolation");
    for (std::size_t i = 0; i < samples_.size(); ++i)
    {
        const auto& s = samples_[i];
        if (!(s.wavelength > 0.0))
            throw ValidationError("coating sample " + std::to_string(i) + ": wavelength must be positive");
        if (i > 0 && !(s.wavelength > samples_[i - 1].wavelength))
            throw ValidationError("coating sample " + std::to_string(i) +
                                  ": wavelengths must be strictly increasing");
        if (!(s.reflectivity >= 0.0 && s.reflectivity < 1.0))
            throw ValidationError("coating sample " + std::to_string(i) + ": reflectivity outside [0, 1)");
        if (!std::isfinite(s.phase))
            throw ValidationError("coating sample " + std::to_string(i) + ": phase not finite");
    }
    for (std::size_t i = 1; i < samples_.size(); ++i)
    {
        double step = samples_[i].phase - samples_[i - 1].phase;
        if (std::abs(step) > kPi)
        {
            double turns = std::round(step / kTwoPi);
            for (std::size_t j = i; j < samples_.size(); ++j)
                samples_[j].phase -= turns * kTwoPi;
        }
    }

    const std::size_t n = samples_.size();
    std::vector<double> f(n), r(n), ph(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto& s = samples_[n - 1 - i]; // ascending frequency
        f[i] = wavelength_to_frequency(s.wavelength);
        r[i] = s.reflectivity;
        ph[i] = s.phase;
    }
    domain_ = {f.front(), f.back()};
    reflectivity_ = numerics::Pchip(f, r);
    phase_ = numerics::Pchip(std::move(f), std::move(ph));
}

CoatingModel CoatingModel::constant(double reflectivity, double phase, const WavelengthBand& domain,
                                    std::size_t points)
{
    if (domain.empty() || !(domain.lo > 0.0) || domain.lo == domain.hi)
        throw DomainError("constant coating needs a non-degenerate wavelength domain");
    points = std::max<std::size_t>(points, 4);
    std::vector<CoatingSample> s(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        double t = double(i) / double(points - 1);
        s[i] = {domain.lo + t * (domain.hi - domain.lo), reflectivity, phase};
    }
    s.back().wavelength = domain.hi;
    return CoatingModel(std::move(s));
}

void CoatingModel::require_inside(double frequency) const
{
    if (!contains(frequency))
        throw DomainError("frequency " + csv::format_double(frequency) + " Hz outside coating domain");
}

double CoatingModel::reflectivity(double frequency) const
{
    require_inside(frequency);
    // Monotone cubics do not overshoot, but keep R strictly below one.
    return std::clamp(reflectivity_(frequency), 0.0, std::nextafter(1.0, 0.0));
}

double CoatingModel::phase(double frequency) const
{
    require_inside(frequency);
    return phase_(frequency);
}

double CoatingModel::phase_slope(double frequency) const
{
    require_inside(frequency);
    return phase_.derivative(frequency);
}

CoatingModel load_coating(std::istream& in)
{
    auto table = csv::read_numeric(in);
    csv::expect_header(table, {"wavelength_nm", "reflectivity", "phase_rad"});
    if (table.rows.size() < 4)
        throw ParseError("coating table needs at least 4 rows, got " + std::to_string(table.rows.size()), 0);
    std::vector<CoatingSample> samples;
    samples.reserve(table.rows.size());
    double previous = -INFINITY;
    for (const auto& row : table.rows)
    {
        double wl = row.values[0];
        double r = row.values[1];
        if (!(wl > 0.0))
            throw ParseError("wavelength must be positive", row.line);
        if (!(wl > previous))
            throw ParseError("wavelengths must be strictly increasing", row.line);
        if (!(r >= 0.0 && r < 1.0))
            throw ParseError("reflectivity " + csv::format_double(r) + " outside [0, 1)", row.line);
        if (!std::isfinite(row.values[2]))
            throw ParseError("phase must be finite", row.line);
        previous = wl;
        samples.push_back({wl * 1e-9, r, row.values[2]});
    }
    return CoatingModel(std::move(samples));
}

CoatingModel load_coating_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open coating file '" + path + "'");
    return load_coating(in);
}

void write_coating(std::ostream& out, const CoatingModel& model)
{
    out << "wavelength_nm,reflectivity,phase_rad\n";
    for (const auto& s : model.samples())
        out << csv::format_double(s.wavelength * 1e9) << ',' << csv::format_double(s.reflectivity) << ','
            << csv::format_double(s.phase) << '\n';
}

CoatingModel detrend_phase(const CoatingModel& model)
{
    const auto& in = model.samples();
    const double n = double(in.size());
    // Fit against frequency measured from the domain centre for conditioning;
    // only the slope term is removed afterwards.
    const double f0 = model.frequency_domain().center();
    double sx = 0, sy = 0;
    for (const auto& s : in)
    {
        sx += wavelength_to_frequency(s.wavelength) - f0;
        sy += s.phase;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& s : in)
    {
        double dx = wavelength_to_frequency(s.wavelength) - f0 - mx;
        sxx += dx * dx;
        sxy += dx * (s.phase - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    std::vector<CoatingSample> out = in;
    for (auto& s : out)
        s.phase -= slope * wavelength_to_frequency(s.wavelength);
    return CoatingModel(std::move(out));
}

void validate(const StackDesign& design)
{
    if (!(design.incident_index >= 1.0) || !(design.substrate_index >= 1.0))
        throw ValidationError("stack media indices must be >= 1");
    for (std::size_t i = 0; i < design.layers.size(); ++i)
    {
        if (!(design.layers[i].index >= 1.0))
            throw ValidationError("layer " + std::to_string(i) + ": index must be >= 1");
        if (!(design.layers[i].thickness > 0.0))
            throw ValidationError("layer " + std::to_string(i) + ": thickness must be positive");
    }
}

Reflection stack_reflection(const StackDesign& design, double wavelength)
{
    if (!(wavelength > 0.0))
        throw DomainError("wavelength must be positive");
    validate(design);
    using cd = std::complex<double>;
    const cd i1(0.0, 1.0);
    // M = prod [[cos d, i sin d / n], [i n sin d, cos d]]
    cd m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
    for (const auto& layer : design.layers)
    {
        double delta = kTwoPi * layer.index * layer.thickness / wavelength;
        double c = std::cos(delta), s = std::sin(delta);
        cd a11 = c, a12 = i1 * s / layer.index, a21 = i1 * layer.index * s, a22 = c;
        cd n11 = m11 * a11 + m12 * a21;
        cd n12 = m11 * a12 + m12 * a22;
        cd n21 = m21 * a11 + m22 * a21;
        cd n22 = m21 * a12 + m22 * a22;
        m11 = n11;
        m12 = n12;
        m21 = n21;
        m22 = n22;
    }
    const double n0 = design.incident_index, ns = design.substrate_index;
    cd b = m11 + m12 * ns;
    cd c = m21 + m22 * ns;
    cd r = (n0 * b - c) / (n0 * b + c);
    return {r, std::norm(r), std::arg(r)};
}

StackDesign quarter_wave_stack(double high_index, double low_index, int pairs, double design_wavelength,
                               double substrate_index, double incident_index, bool high_cap)
{
    if (pairs < 0)
        throw DomainError("pair count must be non-negative");
    if (!(design_wavelength > 0.0))
        throw DomainError("design wavelength must be positive");
    StackDesign d{incident_index, substrate_index, {}};
    for (int p = 0; p < pairs; ++p)
    {
        d.layers.push_back({high_index, design_wavelength / (4.0 * high_index)});
        d.layers.push_back({low_index, design_wavelength / (4.0 * low_index)});
    }
    if (high_cap)
        d.layers.push_back({high_index, design_wavelength / (4.0 * high_index)});
    validate(d);
    return d;
}

StackDesign low_dispersion_stack()
{
    constexpr double peak_r = 0.992;
    constexpr int pairs = 5;
    constexpr double n_low = 1.45, n_sub = 1.45, n_inc = 1.0;
    // Capped quarter-wave stack: Y = (nH/nL)^(2p) nH^2 / ns and
    // sqrt(R) = (Y - n0) / (Y + n0) at the design wavelength.
    const double y = n_inc * (1.0 + std::sqrt(peak_r)) / (1.0 - std::sqrt(peak_r));
    const double n_high = std::pow(y * n_sub * std::pow(n_low, 2 * pairs), 1.0 / (2 * pairs + 2));
    return quarter_wave_stack(n_high, n_low, pairs, 910e-9, n_sub, n_inc, true);
}

CoatingModel synthesize_coating(const StackDesign& design, const WavelengthBand& domain,
                                std::size_t points)
{
    if (domain.empty() || !(domain.lo > 0.0) || points < 4)
        throw DomainError("synthesis needs a positive wavelength domain and >= 4 points");
    const auto band = to_frequency(domain);
    std::vector<CoatingSample> s(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        // Uniform in frequency, stored by increasing wavelength.
        double t = double(i) / double(points - 1);
        double f = band.hi - t * (band.hi - band.lo);
        double wl = i == 0 ? domain.lo : (i + 1 == points ? domain.hi : frequency_to_wavelength(f));
        auto r = stack_reflection(design, wl);
        s[i] = {wl, std::min(r.reflectivity, std::nextafter(1.0, 0.0)), r.phase};
    }
    return CoatingModel(std::move(s));
}

std::shared_ptr<const CoatingModel> low_dispersion_coating()
{
    static const auto model =
        std::make_shared<const CoatingModel>(synthesize_coating(low_dispersion_stack(), {650e-9, 1200e-9}));
    return model;
}

double phase_tolerance(double reflectivity)
{
    if (!(reflectivity > 0.0 && reflectivity < 1.0))
        throw DomainError("phase_tolerance requires 0 < R < 1");
    return (1.0 - reflectivity) / std::sqrt(reflectivity);
}

} // namespace combcav
