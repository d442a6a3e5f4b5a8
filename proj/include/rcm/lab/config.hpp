#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rcm/connection.hpp"
#include "rcm/errors.hpp"
#include "rcm/thinning.hpp"

namespace rcm::lab {

/// Invalid configuration document; the message names the line or field.
class ConfigError : public UsageError {
public:
    using UsageError::UsageError;
};

enum class ExperimentKind { Theta, ThetaDecay, Tail, Zeta, Phi, LambdaBounds, L1Scaling, Mecke, Russo, GW, Oracle };

inline constexpr std::array<std::pair<ExperimentKind, std::string_view>, 11> kKindNames{{
    {ExperimentKind::Theta, "theta"},
    {ExperimentKind::ThetaDecay, "theta-decay"},
    {ExperimentKind::Tail, "tail"},
    {ExperimentKind::Zeta, "zeta"},
    {ExperimentKind::Phi, "phi"},
    {ExperimentKind::LambdaBounds, "lambda-bounds"},
    {ExperimentKind::L1Scaling, "l1-scaling"},
    {ExperimentKind::Mecke, "mecke"},
    {ExperimentKind::Russo, "russo"},
    {ExperimentKind::GW, "gw"},
    {ExperimentKind::Oracle, "oracle"},
}};

inline std::string_view kind_name(ExperimentKind k)
{
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) {
            return name;
        }
    }
    return "?";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s)
{
    for (const auto& [kind, name] : kKindNames) {
        if (name == s) {
            return kind;
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

inline std::optional<double> to_real(std::string_view s)
{
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s)
{
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return v;
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_real(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

enum class ValueType { Int, UInt, Real, RealList, Text, Choice, ChoiceList };

struct KeySpec {
    std::string_view key;
    ValueType type;
    /// Default in canonical text form; empty means no default.
    std::string_view fallback;
    /// Allowed values for Choice / ChoiceList, '|' separated.
    std::string_view choices;
    /// Kinds that accept the key; empty means every kind.
    std::vector<ExperimentKind> kinds;
    /// Excluded from the config digest (does not influence outputs).
    bool digest_exempt = false;
};

inline const std::vector<KeySpec>& key_schema()
{
    using K = ExperimentKind;
    static const std::vector<KeySpec> schema{
        {"kind", ValueType::Text, "", "", {}},
        {"model.d", ValueType::Int, "2", "", {}},
        {"model.psi", ValueType::Choice, "boolean-disk", "boolean-disk|radial-profile|zero", {}},
        {"model.p", ValueType::Real, "1", "", {}},
        {"model.r", ValueType::Real, "1", "", {}},
        {"model.profile", ValueType::Text, "", "", {}},
        {"model.r_max", ValueType::Real, "", "", {}},
        {"model.lambda", ValueType::RealList, "", "",
         {K::Theta, K::ThetaDecay, K::Tail, K::Zeta, K::Phi, K::LambdaBounds, K::L1Scaling, K::Mecke, K::Russo, K::GW,
          K::Oracle}},
        {"model.alpha", ValueType::Real, "", "", {K::GW}},
        {"model.thinning", ValueType::ChoiceList, "zero", "zero|const-box|radial-ramp|avoidance",
         {K::Phi, K::LambdaBounds}},
        {"model.thinning.c", ValueType::RealList, "0.5", "", {K::Phi, K::LambdaBounds}},
        {"model.thinning.box_side", ValueType::Real, "4", "", {K::Phi, K::LambdaBounds}},
        {"model.thinning.inner", ValueType::Real, "1", "", {K::Phi, K::LambdaBounds}},
        {"model.thinning.outer", ValueType::Real, "2", "", {K::Phi, K::LambdaBounds}},
        {"model.thinning.anchors", ValueType::Text, "0", "", {K::Phi, K::LambdaBounds}},
        {"run.reps", ValueType::UInt, "10000", "", {}},
        {"run.seed", ValueType::UInt, "1", "", {}},
        {"run.workers", ValueType::UInt, "0", "", {}, true},
        {"run.t", ValueType::RealList, "", "", {K::Theta, K::ThetaDecay, K::Russo}},
        {"run.window", ValueType::Real, "", "", {K::Tail, K::Zeta, K::Mecke, K::Russo}},
        {"run.padding", ValueType::Real, "", "", {K::Phi}},
        {"run.inner_side", ValueType::Real, "4", "", {K::Mecke}},
        {"run.variant", ValueType::Choice, "both", "point-count|isolated-count|both", {K::Mecke}},
        {"run.n_min", ValueType::UInt, "5", "", {K::Zeta}},
        {"run.n_max", ValueType::UInt, "0", "", {K::Zeta}},
        {"run.s_grid", ValueType::RealList, "", "", {K::L1Scaling}},
        {"run.tail_window", ValueType::Real, "0", "", {K::L1Scaling}},
        {"run.tail_reps", ValueType::UInt, "100000", "", {K::L1Scaling}},
        {"run.dlambda", ValueType::Real, "0", "", {K::Russo}},
        {"run.k_max", ValueType::UInt, "50", "", {K::GW}},
        {"output.dir", ValueType::Text, ".", "", {}, true},
        {"output.format", ValueType::Choice, "csv", "csv", {}, true},
    };
    return schema;
}

inline const KeySpec* find_key(std::string_view key)
{
    for (const auto& k : key_schema()) {
        if (k.key == key) {
            return &k;
        }
    }
    return nullptr;
}

/// Raw key-value document: `key = value` lines with dotted sections, `#` comments.
struct ConfigDocument {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, Entry> entries;

    static ConfigDocument parse(std::string_view text)
    {
        ConfigDocument doc;
        std::istringstream in{std::string(text)};
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            }
            const std::string key = detail::trim(std::string_view(line).substr(0, eq));
            const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) {
                throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            }
            if (!doc.entries.try_emplace(key, Entry{value, line_no}).second) {
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
        }
        return doc;
    }
};

/// A fully resolved configuration: every key valid for the kind, defaults filled
/// in, values in canonical text. Equal configs serialize identically.
class ExperimentConfig {
public:
    /// Validates `doc` against the schema for `kind` (strict: unknown keys rejected).
    static ExperimentConfig resolve(ExperimentKind kind, const ConfigDocument& doc)
    {
        ExperimentConfig cfg;
        cfg.kind_ = kind;
        for (const auto& [key, entry] : doc.entries) {
            const auto where = "line " + std::to_string(entry.line) + ": ";
            const KeySpec* spec = find_key(key);
            if (spec == nullptr) {
                throw ConfigError(where + "unknown key '" + key + "'");
            }
            if (!spec->kinds.empty() && std::find(spec->kinds.begin(), spec->kinds.end(), kind) == spec->kinds.end()) {
                throw ConfigError(where + "key '" + key + "' is not used by kind '" + std::string(kind_name(kind)) +
                                  "'");
            }
            if (key == "kind") {
                if (entry.value != kind_name(kind)) {
                    throw ConfigError(where + "kind '" + entry.value + "' does not match command '" +
                                      std::string(kind_name(kind)) + "'");
                }
                continue;
            }
            cfg.values_[key] = canonicalize(*spec, entry.value, where);
        }
        for (const auto& spec : key_schema()) {
            if (spec.key == "kind" || spec.fallback.empty() || cfg.values_.contains(std::string(spec.key))) {
                continue;
            }
            if (spec.kinds.empty() || std::find(spec.kinds.begin(), spec.kinds.end(), kind) != spec.kinds.end()) {
                cfg.values_[std::string(spec.key)] = std::string(spec.fallback);
            }
        }
        return cfg;
    }

    static ExperimentConfig resolve(ExperimentKind kind, const std::map<std::string, std::string>& flat)
    {
        ConfigDocument doc;
        int line = 0;
        for (const auto& [k, v] : flat) {
            doc.entries[k] = {v, ++line};
        }
        return resolve(kind, doc);
    }

    [[nodiscard]] ExperimentKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

    void set(const std::string& key, const std::string& value)
    {
        const KeySpec* spec = find_key(key);
        if (spec == nullptr) {
            throw ConfigError("unknown key '" + key + "'");
        }
        values_[key] = canonicalize(*spec, value, "override " + key + ": ");
    }

    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }

    [[nodiscard]] const std::string& text(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            throw ConfigError("missing required key '" + key + "'");
        }
        return it->second;
    }

    [[nodiscard]] double real(const std::string& key) const { return *detail::to_real(text(key)); }
    [[nodiscard]] std::uint64_t uint(const std::string& key) const { return *detail::to_uint(text(key)); }
    [[nodiscard]] int integer(const std::string& key) const { return std::stoi(text(key)); }

    [[nodiscard]] std::vector<double> reals(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : detail::split(text(key), ',')) {
            out.push_back(*detail::to_real(item));
        }
        return out;
    }

    [[nodiscard]] std::vector<std::string> words(const std::string& key) const
    {
        return detail::split(text(key), ',');
    }

    /// Canonical `key=value` lines of the digest-relevant keys, sorted by key.
    [[nodiscard]] std::string canonical_text() const
    {
        std::string out = "kind=" + std::string(kind_name(kind_)) + "\n";
        for (const auto& [k, v] : values_) {
            if (!find_key(k)->digest_exempt) {
                out += k + "=" + v + "\n";
            }
        }
        return out;
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

private:
    static std::string canonicalize(const KeySpec& spec, const std::string& value, const std::string& where)
    {
        auto bad = [&](const std::string& what) {
            return ConfigError(where + "field '" + std::string(spec.key) + "': " + what + " (got '" + value + "')");
        };
        auto check_choice = [&](const std::string& v) {
            for (const auto& c : detail::split(spec.choices, '|')) {
                if (c == v) {
                    return;
                }
            }
            throw bad("expected one of " + std::string(spec.choices));
        };
        switch (spec.type) {
        case ValueType::Int: {
            int v = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
                throw bad("expected an integer");
            }
            return std::to_string(v);
        }
        case ValueType::UInt: {
            const auto v = detail::to_uint(value);
            if (!v) {
                throw bad("expected a non-negative integer");
            }
            return std::to_string(*v);
        }
        case ValueType::Real: {
            const auto v = detail::to_real(value);
            if (!v) {
                throw bad("expected a real number");
            }
            return detail::format_real(*v);
        }
        case ValueType::RealList: {
            std::string out;
            for (const auto& item : detail::split(value, ',')) {
                const auto v = detail::to_real(item);
                if (!v) {
                    throw bad("expected a comma-separated list of real numbers");
                }
                out += (out.empty() ? "" : ",") + detail::format_real(*v);
            }
            return out;
        }
        case ValueType::Choice: check_choice(value); return value;
        case ValueType::ChoiceList: {
            std::string out;
            for (const auto& item : detail::split(value, ',')) {
                check_choice(item);
                out += (out.empty() ? "" : ",") + item;
            }
            return out;
        }
        case ValueType::Text: return value;
        }
        return value;
    }

    ExperimentKind kind_ = ExperimentKind::Theta;
    std::map<std::string, std::string> values_;
};

/// Builds the connection function described by the model.* keys.
inline ConnectionSpec connection_from(const ExperimentConfig& cfg)
{
    const int d = cfg.integer("model.d");
    const std::string& kind = cfg.text("model.psi");
    try {
        if (kind == "zero") {
            return ConnectionSpec::zero(d, cfg.real("model.r"));
        }
        if (kind == "boolean-disk") {
            return ConnectionSpec::boolean_disk(d, cfg.real("model.p"), cfg.real("model.r"));
        }
        // radial-profile: "radius:probability, radius:probability, ..."
        std::vector<ProfileKnot> knots;
        for (const auto& item : detail::split(cfg.text("model.profile"), ',')) {
            const auto parts = detail::split(item, ':');
            const auto rad = parts.size() == 2 ? detail::to_real(parts[0]) : std::nullopt;
            const auto prob = parts.size() == 2 ? detail::to_real(parts[1]) : std::nullopt;
            if (!rad || !prob) {
                throw ConfigError("field 'model.profile': expected 'radius:probability' items (got '" + item + "')");
            }
            knots.push_back({*rad, *prob});
        }
        const double r_max = cfg.has("model.r_max") ? cfg.real("model.r_max") : knots.back().radius;
        return ConnectionSpec::radial_profile(d, std::move(knots), r_max);
    } catch (const ConfigError&) {
        throw;
    } catch (const UsageError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

/// Builds the thinning family described by the model.thinning.* keys.
/// A const-box entry expands to one member per level in model.thinning.c.
inline std::vector<ThinningFunctionSpec> thinnings_from(const ExperimentConfig& cfg, const ConnectionSpec& psi)
{
    const int d = psi.dimension();
    std::vector<ThinningFunctionSpec> out;
    try {
        for (const auto& kind : cfg.words("model.thinning")) {
            if (kind == "zero") {
                out.push_back(ThinningFunctionSpec::zero(d));
            } else if (kind == "const-box") {
                for (double c : cfg.reals("model.thinning.c")) {
                    out.push_back(
                        ThinningFunctionSpec::const_on_box(c, BoxWindow::centered(d, cfg.real("model.thinning.box_side"))));
                }
            } else if (kind == "radial-ramp") {
                out.push_back(ThinningFunctionSpec::radial_ramp(d, cfg.real("model.thinning.inner"),
                                                                cfg.real("model.thinning.outer")));
            } else {
                // anchors: "x1 x2 ...; x1 x2 ..." (one point per ';')
                std::vector<Point> anchors;
                for (const auto& item : detail::split(cfg.text("model.thinning.anchors"), ';')) {
                    std::istringstream in(item);
                    Point p{};
                    int k = 0;
                    std::string tok;
                    while (in >> tok) {
                        const auto v = detail::to_real(tok);
                        if (!v || k >= d) {
                            throw ConfigError("field 'model.thinning.anchors': bad point '" + item + "'");
                        }
                        p[k++] = *v;
                    }
                    if (k != d) {
                        throw ConfigError("field 'model.thinning.anchors': point '" + item + "' needs " +
                                          std::to_string(d) + " coordinates");
                    }
                    anchors.push_back(p);
                }
                out.push_back(ThinningFunctionSpec::avoidance(psi, std::move(anchors)));
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const UsageError& e) {
        throw ConfigError(std::string("model.thinning: ") + e.what());
    }
    return out;
}

/// Short label of a thinning function for CSV rows.
inline std::string thinning_label(const ThinningFunctionSpec& f)
{
    switch (f.kind()) {
    case ThinningFunctionSpec::Kind::Zero: return "zero";
    case ThinningFunctionSpec::Kind::ConstOnBox:
        return "const-box(c=" + detail::format_real(f.level()) + ";side=" + detail::format_real(f.support().side()) +
               ")";
    case ThinningFunctionSpec::Kind::RadialRamp:
        return "radial-ramp(" + detail::format_real(f.inner()) + ";" + detail::format_real(f.outer()) + ")";
    case ThinningFunctionSpec::Kind::Avoidance:
        return "avoidance(" + std::to_string(f.anchors().size()) + " anchors)";
    }
    return "?";
}

} // namespace rcm::lab
