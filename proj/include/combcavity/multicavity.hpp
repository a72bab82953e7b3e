#pragma once

#include "combcavity/filter_analysis.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace combcav
{

struct BankEntry
{
    std::string name;
    WavelengthBand band;                          // m
    std::shared_ptr<const CoatingModel> coating;
    int m_filter = 2;
    int tooth_offset = 0;                         // passed residue o_i in [0, m)
    LockConfig lock;
    double weight = 1.0;                          // flattening gain in [0, 1]
    std::optional<Medium> medium;                 // overrides the bank medium
    double mirror_radius = kFlatMirror;
};

struct CavityBankPlan
{
    std::vector<BankEntry> entries; // ordered by band
    Medium medium = Vacuum{};
};

void validate(const CavityBankPlan& plan);

struct BankCavityResult
{
    std::string name;
    double locked_length = 0.0;
    FilteredSpectrum spectrum; // full overlap retained, restricted to the entry band
};

struct MergedMode
{
    ModeIndex index = 0;
    double frequency = 0.0;
    double power = 0.0; // weighted output power
    std::size_t cavity = 0;
    bool passed = false;
};

struct BankResult
{
    std::vector<BankCavityResult> cavities;
    std::vector<MergedMode> merged; // sorted by frequency, overlaps clipped at midpoints
};

// Locks every cavity of the bank onto its tooth offset and merges the outputs.
BankResult plan_bank(const CombSpec& comb, const CavityBankPlan& plan);

// Sorted distinct beat frequencies between passed modes (transmission >= 0.5)
// of cavities `first` and `first + 1` in their band overlap.
std::vector<double> overlap_beats(const BankResult& result, const CavityBankPlan& plan, std::size_t first,
                                  double f_rep);

// Smallest nonzero entry of a sorted beat list; throws when there is none.
double minimum_nonzero_beat(const std::vector<double>& beats);

// INI bank file: one [cavity.NAME] section per cavity with band_nm = lo,hi,
// coating (CSV path or "lowdisp"), m, offset, lock_center_nm, lock_width_nm,
// weight and optional mirror_radius_m. Coating paths are resolved relative
// to `base_dir`.
CavityBankPlan load_bank_plan(std::istream& in, const std::string& base_dir = ".");
CavityBankPlan load_bank_plan_file(const std::string& path);

} // namespace combcav
