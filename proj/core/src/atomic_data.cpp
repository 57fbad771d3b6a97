#include "sas/atomic_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "sas/error.hpp"
#include "text_util.hpp"

namespace sas {

std::string_view to_string(IsotopeId id) {
    return id == IsotopeId::Rb85 ? "Rb85" : "Rb87";
}

IsotopeId parse_isotope(std::string_view name) {
    if (name == "Rb85" || name == "85Rb") return IsotopeId::Rb85;
    if (name == "Rb87" || name == "87Rb") return IsotopeId::Rb87;
    throw ParseError(fmt::format("unknown isotope '{}'", name));
}

const Isotope& LineTable::isotope(IsotopeId id) const {
    auto it = std::find_if(isotopes.begin(), isotopes.end(),
                           [id](const Isotope& iso) { return iso.id == id; });
    if (it == isotopes.end()) throw NotFoundError(fmt::format("isotope {} not in table", to_string(id)));
    return *it;
}

FeatureRef FeatureRef::parse(std::string_view text) {
    auto parts = detail::split(text, ':');
    if (parts.size() != 3 || !parts[1].starts_with("F="))
        throw ParseError(fmt::format("feature '{}' is not of the form Isotope:F=n:label", text));
    FeatureRef ref;
    ref.isotope = parse_isotope(parts[0]);
    ref.f_ground = detail::to_int(parts[1].substr(2));
    ref.label = std::string(parts[2]);
    return ref;
}

std::string FeatureRef::str() const {
    return fmt::format("{}:F={}:{}", to_string(isotope), f_ground, label);
}

namespace {

bool parse_crossover_label(std::string_view label, int& lo, int& hi) {
    if (!label.starts_with("co(") || !label.ends_with(")")) return false;
    auto inner = label.substr(3, label.size() - 4);
    auto parts = detail::split(inner, ',');
    if (parts.size() != 2) return false;
    lo = detail::to_int(parts[0]);
    hi = detail::to_int(parts[1]);
    return true;
}

int excited_f(const TransitionLine& line) {
    std::string_view label = line.f_excited_label;
    if (!label.starts_with("F'=")) throw ValidationError("direct line label must be F'=n: " + line.f_excited_label);
    return detail::to_int(label.substr(3));
}

bool same_manifold(const TransitionLine& a, const TransitionLine& b) {
    return a.isotope == b.isotope && a.f_ground == b.f_ground;
}

void validate(const LineTable& table) {
    if (!(table.carrier_hz > 0.0) || !std::isfinite(table.carrier_hz))
        throw ValidationError("carrier_hz must be a positive finite frequency");

    double abundance_sum = 0.0;
    for (const auto& iso : table.isotopes) {
        if (!(iso.mass_kg > 0.0)) throw ValidationError(fmt::format("{} mass must be positive", to_string(iso.id)));
        if (iso.abundance < 0.0 || iso.abundance > 1.0)
            throw ValidationError(fmt::format("{} abundance outside [0,1]", to_string(iso.id)));
        abundance_sum += iso.abundance;
    }
    if (std::abs(abundance_sum - 1.0) > 1e-9)
        throw ValidationError(fmt::format("isotope abundances sum to {}, expected 1", abundance_sum));

    for (std::size_t i = 0; i < table.lines.size(); ++i) {
        const auto& line = table.lines[i];
        if (!std::isfinite(line.detuning_hz)) throw ValidationError("non-finite detuning");
        if (!(line.strength > 0.0)) throw ValidationError("line strength must be positive");
        if (!(line.gamma_natural_hz > 0.0)) throw ValidationError("natural width must be positive");
        if (i > 0 && line.detuning_hz < table.lines[i - 1].detuning_hz)
            throw ValidationError(fmt::format("lines not sorted by detuning at '{}'", line.f_excited_label));
        for (std::size_t j = 0; j < i; ++j) {
            if (same_manifold(line, table.lines[j]) && line.f_excited_label == table.lines[j].f_excited_label)
                throw ValidationError(fmt::format("duplicate line {}:F={}:{}", to_string(line.isotope),
                                                  line.f_ground, line.f_excited_label));
        }
        table.isotope(line.isotope);
    }

    // Crossovers stored in the file must sit exactly on their parents' midpoint.
    for (const auto& line : table.lines) {
        if (!line.is_crossover) continue;
        int lo = 0, hi = 0;
        parse_crossover_label(line.f_excited_label, lo, hi);
        const TransitionLine* a = nullptr;
        const TransitionLine* b = nullptr;
        for (const auto& other : table.lines) {
            if (other.is_crossover || !same_manifold(line, other)) continue;
            if (other.f_excited_label == fmt::format("F'={}", lo)) a = &other;
            if (other.f_excited_label == fmt::format("F'={}", hi)) b = &other;
        }
        if (!a || !b) throw ValidationError("crossover " + line.f_excited_label + " lacks parent lines");
        if (line.detuning_hz != 0.5 * (a->detuning_hz + b->detuning_hz))
            throw ValidationError("crossover " + line.f_excited_label + " is not at its parents' midpoint");
    }

    const std::pair<IsotopeId, int> required[] = {
        {IsotopeId::Rb87, 1}, {IsotopeId::Rb87, 2}, {IsotopeId::Rb85, 2}, {IsotopeId::Rb85, 3}};
    for (auto [iso, f] : required) {
        bool present = std::any_of(table.lines.begin(), table.lines.end(), [&](const TransitionLine& l) {
            return !l.is_crossover && l.isotope == iso && l.f_ground == f;
        });
        if (!present)
            throw ValidationError(fmt::format("table lacks the {} F={} manifold", to_string(iso), f));
    }
}

}  // namespace

LineTable parse_line_data(std::string_view text) {
    LineTable table;
    std::map<IsotopeId, Isotope> isotopes;
    std::vector<IsotopeId> isotope_order;
    bool have_header = false;
    bool have_carrier = false;

    std::size_t line_no = 0;
    for (std::string_view raw : detail::split_lines(text)) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (!have_header) {
            if (line.starts_with("format=") && line != kLineFormat)
                throw ParseError(fmt::format("unsupported line-data format '{}'", line.substr(7)), line_no);
            if (line != kLineFormat) throw ParseError("missing 'format=rb-lines/1' header", line_no);
            have_header = true;
            continue;
        }

        // Metadata is key=value with the '=' before any comma; values may contain commas.
        const auto comma = line.find(',');
        const auto eq = line.find('=');
        if (comma == std::string_view::npos || (eq != std::string_view::npos && eq < comma)) {
            if (eq == std::string_view::npos) throw ParseError("expected key=value or a line record", line_no);
            auto key = detail::trim(line.substr(0, eq));
            auto value = detail::trim(line.substr(eq + 1));
            try {
                if (key == "carrier_hz") {
                    table.carrier_hz = detail::to_double(value);
                    have_carrier = true;
                } else if (key == "source_note") {
                    table.source_note = std::string(value);
                } else {
                    throw ParseError(fmt::format("unknown metadata key '{}'", key), line_no);
                }
            } catch (const ParseError& e) {
                if (e.line()) throw;
                throw ParseError(e.what(), line_no);
            }
            continue;
        }

        auto fields = detail::split(line, ',');
        if (fields.size() != 8)
            throw ParseError(fmt::format("expected 8 fields, found {}", fields.size()), line_no);
        try {
            Isotope iso;
            iso.id = parse_isotope(detail::trim(fields[0]));
            iso.abundance = detail::to_double(detail::trim(fields[1]));
            iso.mass_kg = detail::to_double(detail::trim(fields[2]));
            auto [it, inserted] = isotopes.emplace(iso.id, iso);
            if (inserted) {
                isotope_order.push_back(iso.id);
            } else if (!(it->second == iso)) {
                throw ValidationError(fmt::format("inconsistent abundance/mass for {}", to_string(iso.id)));
            }

            TransitionLine tl;
            tl.isotope = iso.id;
            tl.f_ground = detail::to_int(detail::trim(fields[3]));
            tl.f_excited_label = std::string(detail::trim(fields[4]));
            tl.detuning_hz = detail::to_double(detail::trim(fields[5]));
            tl.strength = detail::to_double(detail::trim(fields[6]));
            tl.gamma_natural_hz = detail::to_double(detail::trim(fields[7]));
            int lo = 0, hi = 0;
            tl.is_crossover = parse_crossover_label(tl.f_excited_label, lo, hi);
            if (!tl.is_crossover) excited_f(tl);
            table.lines.push_back(std::move(tl));
        } catch (const ParseError& e) {
            if (e.line()) throw;
            throw ParseError(e.what(), line_no);
        } catch (const NotFoundError& e) {
            throw ParseError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!have_header) throw ParseError("empty line-data file");
    if (!have_carrier) throw ParseError("missing carrier_hz");
    for (auto id : isotope_order) table.isotopes.push_back(isotopes.at(id));

    validate(table);
    return table;
}

LineTable load_line_data(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open line-data file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_line_data(buf.str());
}

std::string serialize_line_data(const LineTable& table) {
    std::string out;
    out += kLineFormat;
    out += '\n';
    out += fmt::format("carrier_hz={}\n", table.carrier_hz);
    if (!table.source_note.empty()) out += fmt::format("source_note={}\n", table.source_note);
    out += "# isotope, abundance, mass_kg, f_ground, f_excited_label, detuning_hz, strength, gamma_natural_hz\n";
    for (const auto& line : table.lines) {
        const auto& iso = table.isotope(line.isotope);
        out += fmt::format("{}, {}, {}, {}, {}, {}, {}, {}\n", to_string(iso.id), iso.abundance, iso.mass_kg,
                           line.f_ground, line.f_excited_label, line.detuning_hz, line.strength,
                           line.gamma_natural_hz);
    }
    return out;
}

std::vector<TransitionLine> transitions(const LineTable& table, IsotopeId isotope, int f_ground) {
    std::vector<TransitionLine> out;
    for (const auto& line : table.lines) {
        if (!line.is_crossover && line.isotope == isotope && line.f_ground == f_ground) out.push_back(line);
    }
    if (out.empty())
        throw NotFoundError(fmt::format("no {} F={} manifold in table", to_string(isotope), f_ground));
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.detuning_hz < b.detuning_hz; });
    return out;
}

std::vector<Manifold> manifolds(const LineTable& table) {
    std::vector<Manifold> out;
    for (const auto& line : table.lines) {
        if (line.is_crossover) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const Manifold& m) {
            return m.isotope == line.isotope && m.f_ground == line.f_ground;
        });
        if (it == out.end()) {
            out.push_back({line.isotope, line.f_ground, {}});
            it = std::prev(out.end());
        }
        it->direct.push_back(line);
    }
    return out;
}

std::vector<TransitionLine> derive_crossovers(std::span<const TransitionLine> lines, double enhancement) {
    if (!(enhancement > 0.0)) throw ValidationError("crossover enhancement must be positive");
    std::vector<TransitionLine> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].is_crossover) throw ValidationError("derive_crossovers expects direct lines only");
        if (!same_manifold(lines[i], lines.front()))
            throw ValidationError("derive_crossovers given lines from different manifolds");
        for (std::size_t j = 0; j < i; ++j) {
            if (lines[i].f_excited_label == lines[j].f_excited_label)
                throw ValidationError("duplicate line " + lines[i].f_excited_label);
        }
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const auto& a = lines[i];
            const auto& b = lines[j];
            int fa = excited_f(a);
            int fb = excited_f(b);
            TransitionLine co;
            co.isotope = a.isotope;
            co.f_ground = a.f_ground;
            co.f_excited_label = fmt::format("co({},{})", std::min(fa, fb), std::max(fa, fb));
            co.detuning_hz = 0.5 * (a.detuning_hz + b.detuning_hz);
            co.strength = enhancement * 0.5 * (a.strength + b.strength);
            co.gamma_natural_hz = 0.5 * (a.gamma_natural_hz + b.gamma_natural_hz);
            co.is_crossover = true;
            out.push_back(std::move(co));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.detuning_hz < b.detuning_hz; });
    return out;
}

std::vector<TransitionLine> all_features(const LineTable& table, double crossover_enhancement) {
    std::vector<TransitionLine> out;
    for (const auto& m : manifolds(table)) {
        out.insert(out.end(), m.direct.begin(), m.direct.end());
        auto co = derive_crossovers(m.direct, crossover_enhancement);
        out.insert(out.end(), co.begin(), co.end());
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.detuning_hz < b.detuning_hz; });
    return out;
}

TransitionLine find_feature(const LineTable& table, const FeatureRef& ref, double crossover_enhancement) {
    for (const auto& f : all_features(table, crossover_enhancement)) {
        if (f.isotope == ref.isotope && f.f_ground == ref.f_ground && f.f_excited_label == ref.label) return f;
    }
    throw NotFoundError("unknown feature " + ref.str());
}

FeatureRef default_pump_feature() { return {IsotopeId::Rb87, 2, "co(2,3)"}; }
FeatureRef default_repump_feature() { return {IsotopeId::Rb87, 1, "co(1,2)"}; }

double pump_repump_separation(const LineTable& table, const FeatureRef& pump, const FeatureRef& repump) {
    return std::abs(find_feature(table, pump).detuning_hz - find_feature(table, repump).detuning_hz);
}

}  // namespace sas
