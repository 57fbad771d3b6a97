#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sas {

enum class IsotopeId { Rb85, Rb87 };

std::string_view to_string(IsotopeId id);
IsotopeId parse_isotope(std::string_view name);

struct Isotope {
    IsotopeId id = IsotopeId::Rb87;
    double abundance = 0.0;  // fraction in [0,1]
    double mass_kg = 0.0;

    bool operator==(const Isotope&) const = default;
};

/// One hyperfine line, or a crossover between two lines of the same ground level.
/// Detunings are in Hz relative to LineTable::carrier_hz.
struct TransitionLine {
    IsotopeId isotope = IsotopeId::Rb87;
    int f_ground = 0;
    std::string f_excited_label;  // "F'=3" or "co(2,3)"
    double detuning_hz = 0.0;
    double strength = 0.0;
    double gamma_natural_hz = 0.0;  // natural FWHM
    bool is_crossover = false;

    bool operator==(const TransitionLine&) const = default;
};

struct LineTable {
    double carrier_hz = 0.0;  // absolute optical frequency of zero detuning
    std::vector<Isotope> isotopes;
    std::vector<TransitionLine> lines;  // ascending detuning
    std::string source_note;

    const Isotope& isotope(IsotopeId id) const;

    bool operator==(const LineTable&) const = default;
};

/// Names one spectral feature, e.g. "Rb87:F=2:co(2,3)" or "Rb85:F=3:F'=4".
struct FeatureRef {
    IsotopeId isotope = IsotopeId::Rb87;
    int f_ground = 0;
    std::string label;

    static FeatureRef parse(std::string_view text);
    std::string str() const;

    bool operator==(const FeatureRef&) const = default;
};

/// Ground-level manifold: all direct lines sharing isotope and F.
struct Manifold {
    IsotopeId isotope;
    int f_ground;
    std::vector<TransitionLine> direct;
};

inline constexpr std::string_view kLineFormat = "format=rb-lines/1";

/// Throws ParseError (with line number) or ValidationError.
LineTable parse_line_data(std::string_view text);
LineTable load_line_data(const std::filesystem::path& path);
std::string serialize_line_data(const LineTable& table);

/// Direct lines of one manifold, ascending detuning. Throws NotFoundError.
std::vector<TransitionLine> transitions(const LineTable& table, IsotopeId isotope, int f_ground);

/// Direct-line manifolds present in the table, in order of first appearance by detuning.
std::vector<Manifold> manifolds(const LineTable& table);

/// One crossover per unordered pair at the detuning midpoint; strength is the
/// parents' mean times `enhancement`. Throws ValidationError on mixed manifolds.
std::vector<TransitionLine> derive_crossovers(std::span<const TransitionLine> lines,
                                              double enhancement = 1.0);

/// Direct lines plus crossovers of every manifold, ascending detuning.
std::vector<TransitionLine> all_features(const LineTable& table, double crossover_enhancement = 1.0);

/// Looks up a direct line or crossover. Throws NotFoundError.
TransitionLine find_feature(const LineTable& table, const FeatureRef& ref,
                            double crossover_enhancement = 1.0);

FeatureRef default_pump_feature();
FeatureRef default_repump_feature();

/// |detuning(pump) - detuning(repump)| in Hz.
double pump_repump_separation(const LineTable& table,
                              const FeatureRef& pump = default_pump_feature(),
                              const FeatureRef& repump = default_repump_feature());

}  // namespace sas
