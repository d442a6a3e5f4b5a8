#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "rcm/lab/config.hpp"

namespace rcm::lab {

inline constexpr std::string_view kLabVersion = "1.0.0";
inline constexpr std::string_view kSidecarSchema = "rcm-lab-sidecar/v1";

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_digest(const ExperimentConfig& cfg) { return fnv1a_hex(cfg.canonical_text()); }

struct Sidecar {
    ExperimentConfig config;
    std::string digest;
    std::string csv_file;
    std::string csv_digest;
    std::string version;
    std::size_t workers = 0;
    double wall_clock_seconds = 0.0;

    explicit Sidecar(ExperimentConfig cfg) : config(std::move(cfg)) {}

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json flat = nlohmann::json::object();
        for (const auto& [k, v] : config.values()) {
            flat[k] = v;
        }
        return {
            {"schema", kSidecarSchema},
            {"version", version},
            {"kind", kind_name(config.kind())},
            {"seed", config.uint("run.seed")},
            {"config", flat},
            {"config_digest", digest},
            {"csv", csv_file},
            {"csv_digest", csv_digest},
            {"workers", workers},
            {"wall_clock_seconds", wall_clock_seconds},
        };
    }

    /// Parses a sidecar; `run.seed` in the config block wins over the top-level copy.
    static Sidecar from_json(const nlohmann::json& j)
    {
        try {
            if (j.at("schema").get<std::string>() != kSidecarSchema) {
                throw ConfigError("sidecar: unsupported schema '" + j.at("schema").get<std::string>() + "'");
            }
            const auto kind_text = j.at("kind").get<std::string>();
            const auto kind = parse_kind(kind_text);
            if (!kind) {
                throw ConfigError("sidecar: unknown kind '" + kind_text + "'");
            }
            std::map<std::string, std::string> flat;
            for (const auto& [k, v] : j.at("config").items()) {
                flat[k] = v.get<std::string>();
            }
            if (!flat.contains("run.seed") && j.contains("seed")) {
                flat["run.seed"] = std::to_string(j.at("seed").get<std::uint64_t>());
            }
            Sidecar s{ExperimentConfig::resolve(*kind, flat)};
            s.digest = j.value("config_digest", "");
            s.csv_file = j.at("csv").get<std::string>();
            s.csv_digest = j.value("csv_digest", "");
            s.version = j.value("version", "");
            s.workers = j.value("workers", std::size_t{0});
            s.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
            return s;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("sidecar: malformed document: ") + e.what());
        }
    }
};

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

/// First line where two texts differ: (1-based line number, line of a, line of b).
struct LineDifference {
    std::size_t line = 0;
    std::string expected;
    std::string actual;
};

inline std::optional<LineDifference> first_difference(std::string_view a, std::string_view b)
{
    std::istringstream ia{std::string(a)};
    std::istringstream ib{std::string(b)};
    std::string la;
    std::string lb;
    for (std::size_t line = 1;; ++line) {
        const bool ha = static_cast<bool>(std::getline(ia, la));
        const bool hb = static_cast<bool>(std::getline(ib, lb));
        if (!ha && !hb) {
            return std::nullopt;
        }
        if (!ha || !hb || la != lb) {
            return LineDifference{line, ha ? la : "<end of file>", hb ? lb : "<end of file>"};
        }
    }
}

} // namespace rcm::lab
