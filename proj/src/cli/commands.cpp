#include "combcavity/calibration.hpp"
#include "combcavity/cli.hpp"
#include "combcavity/csv.hpp"
#include "combcavity/errors.hpp"
#include "combcavity/multicavity.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace combcav::cli
{

namespace
{

namespace fs = std::filesystem;
using csv::format_double;

std::string num(double v)
{
    return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
}

std::string integer(long long v)
{
    return std::to_string(v);
}

struct Context
{
    std::string command;
    Config cfg;
    std::ostream& out;
    bool timestamp = false;
    bool gnuplot = false;

    std::string section() const
    {
        std::string s = command;
        std::replace(s.begin(), s.end(), '-', '_');
        return s;
    }
    std::string key(const std::string& name) const { return section() + "." + name; }
    std::uint64_t seed() const
    {
        const std::string text = cfg.get_string("run.seed", "1");
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ValidationError("run.seed must be a non-negative integer, got '" + text + "'");
        return v;
    }
    fs::path out_dir() const
    {
        fs::path dir = cfg.has("output.dir") ? cfg.get_path("output.dir") : fs::path(".");
        fs::create_directories(dir);
        return dir;
    }
};

class CsvOut
{
public:
    CsvOut(const Context& ctx, const std::string& name, std::vector<std::string> columns)
        : path_(ctx.out_dir() / (name + ".csv")), columns_(std::move(columns)), file_(path_)
    {
        if (!file_)
            throw ValidationError("cannot write '" + path_.string() + "'");
        file_ << "# combcavity " << ctx.command << '\n';
        file_ << "# config-hash fnv1a64:" << ctx.cfg.hash_hex() << '\n';
        file_ << "# seed " << ctx.seed() << '\n';
        if (ctx.timestamp)
        {
            const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            std::tm utc{};
            gmtime_r(&now, &utc);
            file_ << "# generated " << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ") << '\n';
        }
        for (std::size_t i = 0; i < columns_.size(); ++i)
            file_ << (i ? "," : "") << columns_[i];
        file_ << '\n';
    }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
            file_ << (i ? "," : "") << cells[i];
        file_ << '\n';
    }

    const fs::path& path() const { return path_; }
    const std::vector<std::string>& columns() const { return columns_; }

    void finish(const Context& ctx, std::size_t x, std::vector<std::size_t> ys)
    {
        file_.close();
        ctx.out << "wrote " << path_.string() << '\n';
        if (!ctx.gnuplot)
            return;
        fs::path script = path_;
        script.replace_extension(".gp");
        std::ofstream gp(script);
        gp << "set datafile separator ','\n";
        gp << "set datafile commentschars '#'\n";
        gp << "set key autotitle columnhead\n";
        gp << "set xlabel '" << columns_.at(x) << "'\n";
        gp << "plot ";
        for (std::size_t i = 0; i < ys.size(); ++i)
            gp << (i ? ", \\\n     " : "") << "'" << path_.filename().string() << "' using " << x + 1 << ":"
               << ys[i] + 1 << " with linespoints";
        gp << "\npause mouse close\n";
        ctx.out << "wrote " << script.string() << '\n';
    }

private:
    fs::path path_;
    std::vector<std::string> columns_;
    std::ofstream file_;
};

WavelengthBand nm_band(const std::pair<double, double>& p)
{
    return {p.first * 1e-9, p.second * 1e-9};
}

std::shared_ptr<const CoatingModel> make_coating(const Config& cfg)
{
    const std::string kind = cfg.get_string("cavity.coating", "lowdisp");
    if (kind == "lowdisp")
        return low_dispersion_coating();
    if (kind == "flat")
    {
        const auto domain = cfg.get_pair("cavity.domain_nm").value_or(std::pair{600.0, 1100.0});
        return std::make_shared<const CoatingModel>(CoatingModel::constant(
            cfg.get_double("cavity.reflectivity", 0.99), cfg.get_double("cavity.phase_rad", 0.0), nm_band(domain)));
    }
    auto model = load_coating_file(cfg.get_path("cavity.coating").string());
    if (cfg.get_bool("cavity.detrend_phase", false))
        model = detrend_phase(model);
    return std::make_shared<const CoatingModel>(std::move(model));
}

AirConditions make_air(const Config& cfg)
{
    AirConditions air = standard_air();
    air.temperature_c = cfg.get_double("air.temperature_c", air.temperature_c);
    air.pressure_pa = cfg.get_double("air.pressure_pa", air.pressure_pa);
    if (cfg.has("air.pressure_torr"))
        air.pressure_pa = cfg.get_double("air.pressure_torr", 0.0) * kPascalPerTorr;
    air.relative_humidity = cfg.get_double("air.relative_humidity", air.relative_humidity);
    air.co2_ppm = cfg.get_double("air.co2_ppm", air.co2_ppm);
    validate(air);
    return air;
}

LockConfig make_lock(const Config& cfg)
{
    LockConfig lock;
    lock.filter_center = cfg.get_double("lock.center_nm", 800.0) * 1e-9;
    lock.filter_width = cfg.get_double("lock.width_nm", 2.0) * 1e-9;
    lock.m_filter = cfg.get_int("lock.m", 20);
    lock.search_halfwidth = cfg.get_double("lock.search_halfwidth_m", 0.0);
    return lock;
}

Medium make_medium(const Config& cfg, double reference_frequency)
{
    const std::string kind = cfg.get_string("cavity.medium", "vacuum");
    if (kind == "vacuum")
        return Vacuum{};
    if (kind == "air")
        return make_air(cfg);
    if (kind == "linear")
        return LinearDispersion{cfg.get_double("cavity.index", 1.0), reference_frequency,
                                cfg.get_double("cavity.delta_n", 0.0)};
    throw ValidationError("cavity.medium must be vacuum, air or linear, got '" + kind + "'");
}

double f_rep_of(const Config& cfg)
{
    return cfg.get_double("comb.f_rep_hz", 1e9);
}

// Cavity at cavity.length_m, or at the nominal length for the lock.
CavitySpec make_cavity(const Config& cfg, const LockConfig& lock)
{
    CavitySpec cav;
    cav.coating = make_coating(cfg);
    cav.mirror_radius = cfg.get_double("cavity.mirror_radius_m", kFlatMirror);
    cav.medium = make_medium(cfg, wavelength_to_frequency(lock.filter_center));
    if (cfg.has("cavity.geometric_phase_rad"))
        cav.geometric_phase = cfg.get_double("cavity.geometric_phase_rad", 0.0);
    cav.length = cfg.has("cavity.length_m")
                     ? cfg.get_double("cavity.length_m", 0.0)
                     : nominal_length(f_rep_of(cfg), lock.m_filter, cav.medium, cav.coating, lock.filter_center,
                                      cav.mirror_radius);
    validate(cav);
    return cav;
}

CombSpec make_comb(const Config& cfg, const FrequencyBand& band)
{
    Envelope env = Envelope::flat(cfg.get_double("comb.power", 1.0));
    if (cfg.has("comb.envelope_csv") && !cfg.get_string("comb.envelope_csv", "").empty())
        env = load_envelope_file(cfg.get_path("comb.envelope_csv").string());
    FrequencyBand b = band;
    if (!env.is_flat())
    {
        const auto d = env.domain();
        b = {std::max(b.lo, d.lo), std::min(b.hi, d.hi)};
        if (b.empty())
            throw ValidationError("envelope does not overlap the analysed band");
    }
    return CombSpec::covering(f_rep_of(cfg), cfg.get_double("comb.f_o_hz", 0.0), b, std::move(env),
                              cfg.get_double("comb.linewidth_hz", 0.0));
}

FrequencyBand analysis_band(const Context& ctx, const CoatingModel& coating)
{
    if (auto band = ctx.cfg.get_pair(ctx.key("band_nm")))
        return to_frequency(nm_band(*band));
    return coating.frequency_domain();
}

int filter_spectrum(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const auto cav = make_cavity(ctx.cfg, lock);
    const auto comb = make_comb(ctx.cfg, analysis_band(ctx, *cav.coating));
    const auto spec = filter_comb(comb, cav, lock, cav.length);

    CsvOut csv(ctx, "filter_spectrum",
               {"index", "frequency_hz", "wavelength_nm", "input_power", "transmission", "output_power", "passed"});
    for (const auto& m : spec.modes)
        csv.row({integer(m.index), num(m.frequency), num(frequency_to_wavelength(m.frequency) * 1e9),
                 num(m.input_power()), num(m.transmission()), num(m.output_power()), spec.is_passed(m.index) ? "1" : "0"});
    csv.finish(ctx, 2, {4});
    const auto band = usable_bandwidth(spec, 0.5);
    ctx.out << "locked length " << num(spec.locked_length) << " m, passed residue " << spec.passed_residue
            << " (mod " << spec.m_filter << "), usable 50% band "
            << (band.empty() ? std::string("empty")
                             : num(band.lo * 1e9) + "-" + num(band.hi * 1e9) + " nm")
            << '\n';
    return kExitOk;
}

int offset_scan_cmd(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const auto cav = make_cavity(ctx.cfg, lock);
    const auto comb = make_comb(ctx.cfg, analysis_band(ctx, *cav.coating));
    const int points = ctx.cfg.get_int(ctx.key("points"), 32);
    if (points < 2)
        throw ValidationError("offset scan needs at least 2 points");
    std::vector<double> shifts;
    for (int i = 0; i < points; ++i)
        shifts.push_back(comb.f_rep() * i / (points - 1));
    OffsetScanOptions opt;
    opt.analysis_width = ctx.cfg.get_double(ctx.key("analysis_width_nm"), 50.0) * 1e-9;
    opt.threshold = ctx.cfg.get_double(ctx.key("threshold"), 0.5);
    const auto scan = offset_scan(comb, cav, lock, shifts, opt);

    CsvOut csv(ctx, "offset_scan",
               {"shift_hz", "locked_length_m", "length_change_m", "center_transmission", "peak_transmission",
                "bandwidth_lo_nm", "bandwidth_hi_nm", "bandwidth_nm"});
    for (const auto& p : scan)
        csv.row({num(p.shift), num(p.locked_length), num(p.locked_length - scan.front().locked_length),
                 num(p.center_transmission), num(p.peak_transmission),
                 p.bandwidth.empty() ? "nan" : num(p.bandwidth.lo * 1e9),
                 p.bandwidth.empty() ? "nan" : num(p.bandwidth.hi * 1e9), num(p.bandwidth.width() * 1e9)});
    csv.finish(ctx, 0, {2, 3, 7});
    return kExitOk;
}

int suppression_scan_cmd(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const auto cav = make_cavity(ctx.cfg, lock);
    const double center = lock.filter_center * 1e9;
    const double start = ctx.cfg.get_double(ctx.key("start_nm"), center - 50.0);
    const double stop = ctx.cfg.get_double(ctx.key("stop_nm"), center + 50.0);
    const int points = ctx.cfg.get_int(ctx.key("points"), 11);
    if (points < 1)
        throw ValidationError("suppression scan needs at least 1 point");
    std::vector<double> wl;
    for (int i = 0; i < points; ++i)
        wl.push_back((points == 1 ? start : start + (stop - start) * i / (points - 1)) * 1e-9);
    const auto comb = make_comb(ctx.cfg, cav.coating->frequency_domain());
    // Each lock wavelength gets the cavity solved for it.
    std::vector<SuppressionRecord> records;
    for (double w : wl)
    {
        LockConfig l = lock;
        l.filter_center = w;
        const auto c = ctx.cfg.has("cavity.length_m") ? cav : make_cavity(ctx.cfg, l);
        auto r = suppression_scan(comb, c, l, {w});
        records.push_back(r.front());
    }

    CsvOut csv(ctx, "suppression_scan",
               {"lock_nm", "locked_length_m", "nnl_db", "nnr_db", "nnl_suppression_db", "nnr_suppression_db",
                "passed_transmission"});
    for (const auto& r : records)
        csv.row({num(r.lock_wavelength * 1e9), num(r.locked_length), num(r.suppression.nnl_db),
                 num(r.suppression.nnr_db), num(-r.suppression.nnl_db), num(-r.suppression.nnr_db),
                 num(r.suppression.passed_transmission)});
    csv.finish(ctx, 0, {4, 5});
    return kExitOk;
}

int rf_spectrum_cmd(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const auto cav = make_cavity(ctx.cfg, lock);
    FrequencyBand band = to_frequency(WavelengthBand{lock.filter_center - 25e-9, lock.filter_center + 25e-9});
    if (auto b = ctx.cfg.get_pair(ctx.key("band_nm")))
        band = to_frequency(nm_band(*b));
    const auto comb = make_comb(ctx.cfg, band);
    auto spec = filter_comb(comb, cav, lock, cav.length);
    std::vector<FilteredMode> kept;
    for (const auto& m : spec.modes)
        if (band.contains(m.frequency))
            kept.push_back(m);
    spec.modes = std::move(kept);
    const int harmonics = ctx.cfg.get_int(ctx.key("max_harmonic"), 2 * lock.m_filter);
    const auto beats = rf_beat_spectrum(spec, harmonics);

    CsvOut csv(ctx, "rf_spectrum",
               {"harmonic", "beat_hz", "power", "normalized", "normalized_db", "pairwise_bound", "pairwise_db"});
    double reference = 0.0;
    for (const auto& b : beats)
        if (b.harmonic == lock.m_filter)
            reference = b.power;
    for (const auto& b : beats)
    {
        const double pair_norm = reference > 0.0 ? b.pairwise_bound / reference : b.pairwise_bound;
        csv.row({integer(b.harmonic), num(b.harmonic * comb.f_rep()), num(b.power), num(b.normalized),
                 num(b.normalized > 0.0 ? 10.0 * std::log10(b.normalized) : -INFINITY), num(b.pairwise_bound),
                 num(pair_norm > 0.0 ? 10.0 * std::log10(pair_norm) : -INFINITY)});
    }
    csv.finish(ctx, 0, {4, 6});
    return kExitOk;
}

int cog_shift_cmd(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const double wavelength = ctx.cfg.get_double(ctx.key("wavelength_nm"), lock.filter_center * 1e9) * 1e-9;
    LockConfig l = lock;
    l.filter_center = wavelength;
    const auto cav = make_cavity(ctx.cfg, l);
    const double f_rep = f_rep_of(ctx.cfg);
    const double linewidth = ctx.cfg.get_double("comb.linewidth_hz", 1e6);
    const double lo = ctx.cfg.get_double(ctx.key("delta_min_hz"), -0.1 * f_rep);
    const double hi = ctx.cfg.get_double(ctx.key("delta_max_hz"), 0.1 * f_rep);
    const int points = ctx.cfg.get_int(ctx.key("points"), 201);
    const double floor_db = ctx.cfg.get_double(ctx.key("min_suppression_db"), 30.0);
    if (points < 1)
        throw ValidationError("cog-shift needs at least 1 point");

    const double nu = wavelength_to_frequency(wavelength);
    const double resonance = find_resonance(cav, nu);
    const double span = 5.0 * lock.m_filter * f_rep;
    const FrequencyBand band{resonance - span, resonance + span};

    CsvOut csv(ctx, "cog_shift",
               {"delta_nu_cc_hz", "nnl_db", "nnr_db", "suppression_db", "cog_shift_hz", "rv_cm_s", "qualifies"});
    double worst = 0.0;
    bool any = false;
    for (int i = 0; i < points; ++i)
    {
        const double delta = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
        const double f_o = std::fmod(std::fmod(resonance - delta, f_rep) + f_rep, f_rep);
        const auto comb = CombSpec::covering(f_rep, f_o, band, Envelope::flat(), linewidth);
        const auto spec = apply_cavity(comb, cav, band, lock.m_filter, resonance);
        const auto s = heterodyne_suppression(spec, resonance);
        const double suppression = -std::max(s.nnl_db, s.nnr_db);
        const double shift = cog_shift(linewidth, cav, resonance, delta);
        const bool ok = suppression >= floor_db;
        if (ok)
        {
            worst = std::max(worst, std::abs(shift));
            any = true;
        }
        csv.row({num(delta), num(s.nnl_db), num(s.nnr_db), num(suppression), num(shift),
                 num(rv_equivalent(shift, nu) * 100.0), ok ? "1" : "0"});
    }
    csv.finish(ctx, 0, {4});
    if (any)
        ctx.out << "max |COG shift| where suppression >= " << num(floor_db) << " dB: " << num(worst) << " Hz ("
                << num(rv_equivalent(worst, nu) * 100.0) << " cm/s)\n";
    else
        ctx.out << "no offset reaches " << num(floor_db) << " dB suppression\n";
    return kExitOk;
}

int bandwidth_cmd(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const auto cav = make_cavity(ctx.cfg, lock);
    const auto comb = make_comb(ctx.cfg, analysis_band(ctx, *cav.coating));
    const auto spec = filter_comb(comb, cav, lock, cav.length);
    const double threshold = ctx.cfg.get_double(ctx.key("threshold"), 0.5);
    const auto band = usable_bandwidth(spec, threshold);

    const double nu = wavelength_to_frequency(lock.filter_center);
    double delta_n = 0.0;
    if (auto d = std::get_if<LinearDispersion>(&cav.medium))
        delta_n = std::abs(d->delta_n);
    else if (std::holds_alternative<AirConditions>(cav.medium))
    {
        // lambda |dn/dlambda| at the lock wavelength
        const double h = 1e-9;
        const double w = lock.filter_center;
        const double slope = (refractive_index(cav.medium, wavelength_to_frequency(w + h)) -
                              refractive_index(cav.medium, wavelength_to_frequency(w - h))) /
                             (2.0 * h);
        delta_n = std::abs(w * slope);
    }
    const double closed =
        delta_n > 0.0 ? bandwidth_closed_form(lock.m_filter, lock.filter_center, comb.f_rep(),
                                              cav.coating->reflectivity(nu), delta_n)
                      : NAN;

    CsvOut csv(ctx, "bandwidth",
               {"lock_nm", "m", "threshold", "locked_length_m", "bandwidth_lo_nm", "bandwidth_hi_nm", "bandwidth_nm",
                "delta_n", "closed_form_nm"});
    csv.row({num(lock.filter_center * 1e9), integer(lock.m_filter), num(threshold), num(spec.locked_length),
             band.empty() ? "nan" : num(band.lo * 1e9), band.empty() ? "nan" : num(band.hi * 1e9),
             num(band.width() * 1e9), num(delta_n), num(closed * 1e9)});
    csv.finish(ctx, 0, {6});
    ctx.out << "usable bandwidth " << num(band.width() * 1e9) << " nm";
    if (delta_n > 0.0)
        ctx.out << ", closed form " << num(closed * 1e9) << " nm";
    ctx.out << '\n';
    return kExitOk;
}

int multicavity_cmd(Context& ctx)
{
    const auto path = ctx.cfg.get_path(ctx.key("plan"));
    if (path.empty())
        throw ValidationError("multicavity-plan needs a bank plan (--plan or multicavity_plan.plan)");
    const auto plan = load_bank_plan_file(path.string());
    WavelengthBand all{plan.entries.front().band.lo, plan.entries.back().band.hi};
    for (const auto& e : plan.entries)
        all = {std::min(all.lo, e.band.lo), std::max(all.hi, e.band.hi)};
    const auto comb = make_comb(ctx.cfg, to_frequency(all));
    const auto result = plan_bank(comb, plan);

    CsvOut cavs(ctx, "multicavity_cavities",
                {"cavity", "band_lo_nm", "band_hi_nm", "offset", "locked_length_m", "usable_lo_nm", "usable_hi_nm"});
    for (std::size_t i = 0; i < result.cavities.size(); ++i)
    {
        const auto& c = result.cavities[i];
        const auto u = usable_bandwidth(c.spectrum);
        cavs.row({c.name, num(plan.entries[i].band.lo * 1e9), num(plan.entries[i].band.hi * 1e9),
                  integer(plan.entries[i].tooth_offset), num(c.locked_length), u.empty() ? "nan" : num(u.lo * 1e9),
                  u.empty() ? "nan" : num(u.hi * 1e9)});
    }
    cavs.finish(ctx, 1, {4});

    CsvOut modes(ctx, "multicavity_modes", {"index", "frequency_hz", "wavelength_nm", "cavity", "passed", "power"});
    for (const auto& m : result.merged)
        modes.row({integer(m.index), num(m.frequency), num(frequency_to_wavelength(m.frequency) * 1e9),
                   result.cavities[m.cavity].name, m.passed ? "1" : "0", num(m.power)});
    modes.finish(ctx, 2, {5});

    CsvOut beats(ctx, "multicavity_beats", {"pair", "beat_hz", "beat_frep"});
    for (std::size_t i = 0; i + 1 < result.cavities.size(); ++i)
    {
        const auto list = overlap_beats(result, plan, i, comb.f_rep());
        const std::string pair = result.cavities[i].name + "-" + result.cavities[i + 1].name;
        for (double b : list)
            beats.row({pair, num(b), num(b / comb.f_rep())});
        ctx.out << pair << ": minimum overlap beat " << num(minimum_nonzero_beat(list) / comb.f_rep())
                << " f_rep\n";
    }
    beats.finish(ctx, 1, {2});
    return kExitOk;
}

SpectrographModel make_spectrograph(const Config& cfg, double center_frequency)
{
    SpectrographModel sm;
    sm.pixels = cfg.get_int("spectrograph.pixels", sm.pixels);
    sm.dispersion = cfg.get_double("spectrograph.dispersion_hz", sm.dispersion);
    sm.psf_sigma = cfg.get_double("spectrograph.psf_sigma", sm.psf_sigma);
    sm.photon_noise = cfg.get_bool("spectrograph.photon_noise", sm.photon_noise);
    sm.read_noise_sigma = cfg.get_double("spectrograph.read_noise", sm.read_noise_sigma);
    sm.exposure_scale = cfg.get_double("spectrograph.exposure_scale", sm.exposure_scale);
    sm.reference_frequency = center_frequency - 0.5 * sm.pixels * sm.dispersion;
    validate(sm);
    return sm;
}

int render_ccd_cmd(Context& ctx)
{
    const auto lock = make_lock(ctx.cfg);
    const auto cav = make_cavity(ctx.cfg, lock);
    const auto full = filter_comb(make_comb(ctx.cfg, cav.coating->frequency_domain()), cav, lock, cav.length);
    const double wanted =
        wavelength_to_frequency(ctx.cfg.get_double("spectrograph.center_nm", lock.filter_center * 1e9) * 1e-9);

    // centre the detector on the passed mode nearest the requested wavelength
    double center = wanted;
    double best = INFINITY;
    for (const auto& m : full.passed())
        if (std::abs(m.frequency - wanted) < best)
        {
            best = std::abs(m.frequency - wanted);
            center = m.frequency;
        }
    const auto sm = make_spectrograph(ctx.cfg, center);

    // order window: n_lines passed modes around the centre, 0 keeps everything
    const int lines = ctx.cfg.get_int("spectrograph.n_lines", 9);
    if (lines < 0)
        throw ValidationError("spectrograph.n_lines must be >= 0");
    const double half = 0.5 * lines * lock.m_filter * f_rep_of(ctx.cfg);
    FilteredSpectrum spec = full;
    spec.modes.clear();
    for (const auto& m : full.modes)
        if (lines == 0 || std::abs(m.frequency - center) < half)
            spec.modes.push_back(m);
    const auto counts = render_ccd(spec, sm, ctx.seed());

    CsvOut csv(ctx, "ccd", {"pixel", "frequency_hz", "counts"});
    for (std::size_t i = 0; i < counts.size(); ++i)
        csv.row({integer(long(i)), num(sm.reference_frequency + double(i) * sm.dispersion), num(counts[i])});
    csv.finish(ctx, 0, {2});
    return kExitOk;
}

int calib_fit_cmd(Context& ctx)
{
    const auto path = ctx.cfg.get_path(ctx.key("input"));
    if (path.empty())
        throw ValidationError("calib-fit needs an input CSV (--input or calib_fit.input)");
    const auto table = csv::read_numeric_file(path.string());
    std::size_t column = table.header.size();
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == "counts")
            column = i;
    if (column == table.header.size())
        throw ParseError("input has no 'counts' column", 1);
    std::vector<double> pixels;
    for (const auto& r : table.rows)
        pixels.push_back(r.values[column]);
    const int lines = ctx.cfg.get_int(ctx.key("n_lines"), ctx.cfg.get_int("spectrograph.n_lines", 9));

    FitOptions opt;
    opt.per_line_amplitude = ctx.cfg.get_bool(ctx.key("per_line_amplitude"), false);
    auto fit = fit_constrained(pixels, lines, opt);
    if (ctx.cfg.get_bool(ctx.key("weighted"), true))
    {
        const double read = ctx.cfg.get_double("spectrograph.read_noise", 0.0);
        auto variance = constrained_model(fit.params, lines, pixels.size(), fit.amplitudes);
        for (auto& v : variance)
            v = std::max(v, 1.0) + read * read;
        opt.variance = variance;
        opt.init = fit.params;
        fit = fit_constrained(pixels, lines, opt);
    }
    const auto per = fit_per_line(pixels, lines, opt);

    const double lock_nm = ctx.cfg.get_double("lock.center_nm", 800.0);
    const double center = wavelength_to_frequency(ctx.cfg.get_double("spectrograph.center_nm", lock_nm) * 1e-9);
    const double dispersion = ctx.cfg.get_double("spectrograph.dispersion_hz", SpectrographModel{}.dispersion);
    const std::size_t base = fit.amplitudes.empty() ? 0 : fit.amplitudes.size() - 1;

    CsvOut csv(ctx, "calib_fit", {"parameter", "value", "sigma"});
    csv.row({"a", num(fit.params.a), fit.amplitudes.empty() ? num(fit.sigma(0)) : "nan"});
    csv.row({"b", num(fit.params.b), num(fit.sigma(base + 1))});
    csv.row({"c", num(fit.params.c), num(fit.sigma(base + 2))});
    csv.row({"d", num(fit.params.d), num(fit.sigma(base + 3))});
    csv.row({"e", num(fit.params.e), num(fit.sigma(base + 4))});
    // velocity precision of the uniform shift
    csv.row({"d_sigma_rv_m_s", num(rv_equivalent(fit.d_sigma() * dispersion, center)), "nan"});
    csv.row({"reduced_chi2", num(fit.reduced_chi2), "nan"});
    csv.row({"residual_rms", num(fit.residual_rms), "nan"});
    csv.finish(ctx, 0, {1});

    CsvOut lines_csv(ctx, "calib_lines",
                     {"line", "position_px", "position_sigma_px", "width_px", "amplitude", "offset", "blended"});
    for (std::size_t j = 0; j < per.lines.size(); ++j)
    {
        const auto& l = per.lines[j];
        lines_csv.row({integer(long(j)), num(l.position), num(std::sqrt(std::max(0.0, l.covariance[2][2]))),
                       num(l.width), num(l.amplitude), num(l.offset), l.blended ? "1" : "0"});
    }
    lines_csv.finish(ctx, 0, {1});
    ctx.out << "d = " << num(fit.params.d) << " +- " << num(fit.d_sigma()) << " px, reduced chi2 "
            << num(fit.reduced_chi2) << '\n';
    return kExitOk;
}

int ciddor_cmd(Context& ctx)
{
    const auto air = make_air(ctx.cfg);
    std::vector<double> wavelengths;
    std::stringstream list(ctx.cfg.get_string(ctx.key("wavelength_nm"), "633"));
    for (std::string item; std::getline(list, item, ',');)
    {
        Config one;
        one.set("x.v", item);
        wavelengths.push_back(one.get_double("x.v", 0.0));
    }
    CsvOut csv(ctx, "ciddor", {"wavelength_nm", "n", "n_minus_1"});
    for (double wl : wavelengths)
    {
        const double n = ciddor_index(air, wl * 1e-9);
        csv.row({num(wl), num(n), num(n - 1.0)});
        std::ostringstream line;
        line << std::setprecision(15) << "n(" << num(wl) << " nm) = " << n << "  (n-1 = " << std::setprecision(12)
             << n - 1.0 << ")";
        ctx.out << line.str() << '\n';
    }
    csv.finish(ctx, 0, {2});
    return kExitOk;
}

using Handler = std::function<int(Context&)>;

const std::vector<std::pair<std::string, Handler>>& handlers()
{
    static const std::vector<std::pair<std::string, Handler>> all{
        {"filter-spectrum", filter_spectrum},     {"offset-scan", offset_scan_cmd},
        {"suppression-scan", suppression_scan_cmd}, {"rf-spectrum", rf_spectrum_cmd},
        {"cog-shift", cog_shift_cmd},             {"bandwidth", bandwidth_cmd},
        {"multicavity-plan", multicavity_cmd},    {"render-ccd", render_ccd_cmd},
        {"calib-fit", calib_fit_cmd},             {"ciddor", ciddor_cmd},
    };
    return all;
}

struct FlagKey
{
    const char* flag;
    const char* key; // '*' stands for the subcommand section
    const char* help;
    bool path = false;
};

const FlagKey kFlags[] = {
    {"--f-rep-hz", "comb.f_rep_hz", "comb repetition rate"},
    {"--f-o-hz", "comb.f_o_hz", "carrier-envelope offset"},
    {"--linewidth-hz", "comb.linewidth_hz", "comb line FWHM"},
    {"--envelope", "comb.envelope_csv", "envelope CSV (wavelength_nm,power)", true},
    {"--coating", "cavity.coating", "lowdisp, flat or a coating CSV", true},
    {"--R", "cavity.reflectivity", "flat-coating reflectivity (selects the flat coating)"},
    {"--medium", "cavity.medium", "vacuum, air or linear"},
    {"--delta-n", "cavity.delta_n", "index change of the linear medium"},
    {"--length-m", "cavity.length_m", "cavity length (default: nominal)"},
    {"--mirror-radius-m", "cavity.mirror_radius_m", "mirror radius of curvature"},
    {"--m", "lock.m", "filter number"},
    {"--lock-nm", "lock.center_nm", "lock filter centre"},
    {"--lock-width-nm", "lock.width_nm", "lock filter width"},
    {"--wavelength-nm", "*.wavelength_nm", "wavelength(s) for ciddor / cog-shift"},
    {"--points", "*.points", "scan points"},
    {"--threshold", "*.threshold", "transmission threshold"},
    {"--max-harmonic", "*.max_harmonic", "largest RF harmonic"},
    {"--plan", "*.plan", "bank plan file", true},
    {"--input", "*.input", "pixel CSV to fit", true},
    {"--n-lines", "*.n_lines", "number of calibration lines"},
};

std::string usage()
{
    std::string s = "usage: combcavity <subcommand> [options]\nsubcommands:";
    for (const auto& name : subcommands())
        s += " " + name;
    return s + "\nrun 'combcavity <subcommand> --help' for options\n";
}

} // namespace

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, _] : handlers())
            v.push_back(name);
        return v;
    }();
    return names;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    if (argc < 2)
    {
        err << usage();
        return kExitUsage;
    }
    const std::string command = argv[1];
    if (command == "--help" || command == "-h")
    {
        out << usage();
        return kExitOk;
    }
    const auto it = std::find_if(handlers().begin(), handlers().end(),
                                 [&](const auto& h) { return h.first == command; });
    if (it == handlers().end())
    {
        err << "unknown subcommand '" << command << "'\n" << usage();
        return kExitUsage;
    }

    CLI::App app{"combcavity " + command, command};
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string seed;
    bool gnuplot = false, timestamp = false, no_timestamp = false;
    app.add_option("--config", config_path, "INI config file (default: $COMBCAVITY_CONFIG)");
    app.add_option("--set", overrides, "override, section.key=value (repeatable)");
    app.add_option("--out", out_dir, "output directory (output.dir)");
    app.add_option("--seed", seed, "random seed (run.seed)");
    app.add_flag("--gnuplot", gnuplot, "also write a gnuplot script per CSV (output.gnuplot)");
    app.add_flag("--timestamp", timestamp, "stamp CSV headers with the UTC time (output.timestamp)");
    app.add_flag("--no-timestamp", no_timestamp, "keep CSV headers free of timestamps (default)");
    std::vector<std::pair<const FlagKey*, std::string>> flag_values;
    flag_values.reserve(std::size(kFlags));
    for (const auto& f : kFlags)
    {
        flag_values.emplace_back(&f, "");
        app.add_option(f.flag, flag_values.back().second, f.help);
    }

    try
    {
        try
        {
            app.parse(argc - 1, argv + 1);
        }
        catch (const CLI::CallForHelp&)
        {
            out << app.help();
            return kExitOk;
        }
        catch (const CLI::ParseError& e)
        {
            throw ValidationError(e.what());
        }

        Context ctx{command, Config{}, out};
        if (config_path.empty())
            if (const char* env = std::getenv("COMBCAVITY_CONFIG"); env && *env)
                config_path = env;
        if (!config_path.empty())
            ctx.cfg = Config::load_file(config_path);
        for (const auto& o : overrides)
            ctx.cfg.apply_override(o);
        for (const auto& [f, value] : flag_values)
        {
            if (app.count(f->flag) == 0)
                continue;
            std::string key = f->key;
            if (key.front() == '*')
                key = ctx.section() + key.substr(1);
            // command-line paths are relative to the working directory
            if (f->path && value != "lowdisp" && value != "flat")
                ctx.cfg.set(key, fs::absolute(value).string());
            else
                ctx.cfg.set(key, value);
            if (key == "cavity.reflectivity" && app.count("--coating") == 0)
                ctx.cfg.set("cavity.coating", "flat");
        }
        if (!out_dir.empty())
            ctx.cfg.set("output.dir", fs::absolute(out_dir).string());
        if (!seed.empty())
            ctx.cfg.set("run.seed", seed);
        if (gnuplot)
            ctx.cfg.set("output.gnuplot", "true");
        if (timestamp)
            ctx.cfg.set("output.timestamp", "true");
        if (no_timestamp)
            ctx.cfg.set("output.timestamp", "false");
        ctx.gnuplot = ctx.cfg.get_bool("output.gnuplot", false);
        ctx.timestamp = ctx.cfg.get_bool("output.timestamp", false);
        return it->second(ctx);
    }
    catch (const ValidationError& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const NumericError& e)
    {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    catch (const fs::filesystem_error& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

} // namespace combcav::cli
