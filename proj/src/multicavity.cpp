#include "combcavity/multicavity.hpp"
#include "combcavity/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace combcav
{

namespace
{

ModeIndex positive_mod(ModeIndex a, ModeIndex m)
{
    ModeIndex r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

void validate(const CavityBankPlan& plan)
{
    if (plan.entries.empty())
        throw ValidationError("cavity bank is empty");
    validate(plan.medium);
    const int m = plan.entries.front().m_filter;
    for (std::size_t i = 0; i < plan.entries.size(); ++i)
    {
        const auto& e = plan.entries[i];
        const std::string who = "cavity '" + e.name + "': ";
        if (!e.coating)
            throw ValidationError(who + "no coating");
        if (!(e.band.lo > 0.0) || !(e.band.lo < e.band.hi))
            throw ValidationError(who + "band must be a positive, non-empty interval");
        if (e.m_filter != m)
            throw ValidationError(who + "all cavities must share one filter number");
        if (e.m_filter < 2)
            throw ValidationError(who + "filter number must be at least 2");
        if (e.tooth_offset < 0 || e.tooth_offset >= e.m_filter)
            throw ValidationError(who + "tooth offset must lie in [0, m)");
        if (!(e.weight >= 0.0 && e.weight <= 1.0))
            throw ValidationError(who + "weight must lie in [0, 1]");
        const auto fb = to_frequency(e.band);
        if (!e.coating->contains(fb.lo) || !e.coating->contains(fb.hi))
            throw DomainError(who + "band outside its coating domain");
        if (e.medium)
            validate(*e.medium);
        validate(e.lock, *e.coating);
        if (i > 0)
        {
            const auto& prev = plan.entries[i - 1].band;
            if (!(prev.lo < e.band.lo))
                throw ValidationError(who + "bands must be ordered by wavelength");
            if (!(prev.hi > e.band.lo))
                throw ValidationError(who + "band must overlap its predecessor");
        }
    }
}

BankResult plan_bank(const CombSpec& comb, const CavityBankPlan& plan)
{
    validate(plan);
    BankResult out;
    for (const auto& e : plan.entries)
    {
        try
        {
            const Medium medium = e.medium ? *e.medium : plan.medium;
            const CavitySpec cav{0.0, e.coating, e.mirror_radius, medium, std::nullopt};
            const double nu = wavelength_to_frequency(e.lock.filter_center);
            const double l0 =
                nominal_length(comb.f_rep(), e.m_filter, medium, e.coating, e.lock.filter_center, e.mirror_radius);

            const auto cav0 = cav.with_length(l0);
            const double resonance = find_resonance(cav0, nu);
            const ModeIndex near = nearest_mode(comb, resonance);
            ModeIndex target = near + positive_mod(e.tooth_offset - near, e.m_filter);
            if (target - near > e.m_filter / 2)
                target -= e.m_filter;
            if (target < comb.n_min())
                target += e.m_filter;
            const double f_target = mode_frequency(comb, target);
            const double center = l0 * resonance / f_target;

            LockConfig lock = e.lock;
            lock.search_halfwidth = 0.5 * comb_step_length(cav0, comb.f_rep(), nu);
            const auto locked = lock_cavity(comb, cav0, lock, center);
            auto spectrum = apply_cavity(comb, cav.with_length(locked.length), to_frequency(e.band), e.m_filter,
                                         f_target);
            spectrum.lock_wavelength = e.lock.filter_center;
            if (spectrum.passed_residue != e.tooth_offset)
                throw NumericError("lock settled on tooth offset " + std::to_string(spectrum.passed_residue));
            out.cavities.push_back({e.name, locked.length, std::move(spectrum)});
        }
        catch (const Error& err)
        {
            std::ostringstream msg;
            msg << "cavity '" << e.name << "' (" << e.band.lo * 1e9 << "-" << e.band.hi * 1e9
                << " nm): " << err.what();
            if (dynamic_cast<const ValidationError*>(&err))
                throw ValidationError(msg.str());
            throw NumericError(msg.str());
        }
    }

    for (std::size_t i = 0; i < plan.entries.size(); ++i)
    {
        // Keep wavelengths in (cut_lo, cut_hi]; cuts sit at overlap midpoints.
        const double cut_lo = i == 0 ? -INFINITY : 0.5 * (plan.entries[i - 1].band.hi + plan.entries[i].band.lo);
        const double cut_hi =
            i + 1 == plan.entries.size() ? INFINITY : 0.5 * (plan.entries[i].band.hi + plan.entries[i + 1].band.lo);
        const auto& spec = out.cavities[i].spectrum;
        for (const auto& m : spec.modes)
        {
            const double wl = frequency_to_wavelength(m.frequency);
            if (wl > cut_lo && wl <= cut_hi)
                out.merged.push_back({m.index, m.frequency, plan.entries[i].weight * m.output_power(), i,
                                      spec.is_passed(m.index)});
        }
    }
    std::sort(out.merged.begin(), out.merged.end(),
              [](const MergedMode& a, const MergedMode& b) { return a.frequency < b.frequency; });
    return out;
}

std::vector<double> overlap_beats(const BankResult& result, const CavityBankPlan& plan, std::size_t first,
                                  double f_rep)
{
    if (first + 1 >= result.cavities.size() || first + 1 >= plan.entries.size())
        throw RangeError("no adjacent cavity pair at position " + std::to_string(first));
    const auto& a = plan.entries[first].band;
    const auto& b = plan.entries[first + 1].band;
    const WavelengthBand overlap{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    if (!(overlap.lo < overlap.hi))
        throw ValidationError("cavity bands do not overlap");
    const auto f_overlap = to_frequency(overlap);

    auto collect = [&](const FilteredSpectrum& s) {
        std::vector<ModeIndex> idx;
        for (const auto& m : s.passed())
            if (f_overlap.contains(m.frequency) && m.transmission() >= 0.5)
                idx.push_back(m.index);
        return idx;
    };
    const auto left = collect(result.cavities[first].spectrum);
    const auto right = collect(result.cavities[first + 1].spectrum);
    if (left.empty() || right.empty())
        throw ValidationError("a cavity passes no mode in the overlap region");
    std::set<ModeIndex> diff;
    for (auto i : left)
        for (auto j : right)
            diff.insert(i > j ? i - j : j - i);
    std::vector<double> out;
    out.reserve(diff.size());
    for (auto d : diff)
        out.push_back(double(d) * f_rep);
    return out;
}

double minimum_nonzero_beat(const std::vector<double>& beats)
{
    for (double b : beats)
        if (b > 0.0)
            return b;
    throw ValidationError("no nonzero beat");
}

namespace
{

namespace pt = boost::property_tree;

std::pair<double, double> parse_pair(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    double lo = 0.0, hi = 0.0;
    char comma = 0;
    if (!(in >> lo >> comma >> hi) || comma != ',')
        throw ValidationError("key '" + key + "' expects 'lo,hi', got '" + text + "'");
    return {lo, hi};
}

AirConditions read_air(const pt::ptree& section)
{
    AirConditions air = standard_air();
    air.temperature_c = section.get("temperature_c", air.temperature_c);
    air.pressure_pa = section.get("pressure_pa", air.pressure_pa);
    air.relative_humidity = section.get("relative_humidity", air.relative_humidity);
    air.co2_ppm = section.get("co2_ppm", air.co2_ppm);
    validate(air);
    return air;
}

Medium read_medium(const std::string& name, const pt::ptree& root)
{
    if (name == "vacuum")
        return Vacuum{};
    if (name == "air")
    {
        auto air = root.get_child_optional("air");
        return air ? read_air(*air) : laboratory_air();
    }
    throw ValidationError("unknown medium '" + name + "' (expected vacuum or air)");
}

} // namespace

CavityBankPlan load_bank_plan(std::istream& in, const std::string& base_dir)
{
    pt::ptree root;
    try
    {
        pt::read_ini(in, root);
    }
    catch (const pt::ini_parser_error& e)
    {
        throw ParseError(e.message(), e.line());
    }
    CavityBankPlan plan;
    if (auto bank = root.get_child_optional("bank"))
        plan.medium = read_medium(bank->get<std::string>("medium", "vacuum"), root);

    std::map<std::string, std::shared_ptr<const CoatingModel>> coatings;
    for (const auto& [section, tree] : root)
    {
        if (section.rfind("cavity.", 0) != 0)
            continue;
        BankEntry e;
        e.name = section.substr(7);
        try
        {
            auto [lo, hi] = parse_pair(tree.get<std::string>("band_nm"), "band_nm");
            e.band = {lo * 1e-9, hi * 1e-9};
            const auto coating = tree.get<std::string>("coating", "lowdisp");
            if (coating == "lowdisp")
                e.coating = low_dispersion_coating();
            else
            {
                auto path = std::filesystem::path(coating);
                if (path.is_relative())
                    path = std::filesystem::path(base_dir) / path;
                auto& slot = coatings[path.string()];
                if (!slot)
                    slot = std::make_shared<const CoatingModel>(load_coating_file(path.string()));
                e.coating = slot;
            }
            e.m_filter = tree.get<int>("m");
            e.tooth_offset = tree.get<int>("offset", 0);
            e.lock.m_filter = e.m_filter;
            e.lock.filter_center = tree.get<double>("lock_center_nm") * 1e-9;
            e.lock.filter_width = tree.get<double>("lock_width_nm", 2.0) * 1e-9;
            e.weight = tree.get<double>("weight", 1.0);
            e.mirror_radius = tree.get<double>("mirror_radius_m", kFlatMirror);
            if (auto medium = tree.get_optional<std::string>("medium"))
                e.medium = read_medium(*medium, root);
        }
        catch (const pt::ptree_error& err)
        {
            throw ValidationError("section [" + section + "]: " + err.what());
        }
        plan.entries.push_back(std::move(e));
    }
    std::stable_sort(plan.entries.begin(), plan.entries.end(),
                     [](const BankEntry& a, const BankEntry& b) { return a.band.lo < b.band.lo; });
    validate(plan);
    return plan;
}

CavityBankPlan load_bank_plan_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open bank plan '" + path + "'");
    return load_bank_plan(in, std::filesystem::path(path).parent_path().string());
}

} // namespace combcav
