#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "musica/error.hpp"
#include "musica/nlm.hpp"
#include "musica/pipeline.hpp"

namespace musica {

/// One run's worth of tunable settings, mirroring the command-line flags.
/// The zero-argument state reproduces the reference experiment: multistage
/// enhancement at seven levels with p = 0.5, x_c = 0.01, a = M = 1, NLM
/// denoising (7-pixel patches, 21-pixel search, h = 0.1), and a 256-bin
/// noise histogram.
struct RunConfig {
    std::string mode = "multistage";  // "conventional" or "multistage"
    int levels = 7;
    double p = 0.5;
    double xc = 0.01;
    double a = 1.0;
    double m = 1.0;
    bool denoise = true;
    double h = 0.1;
    int patch = 7;
    int search = 21;
    int bins = 256;
    int jobs = 1;
    int depth = 16;        // output bit depth, 8 or 16
    bool timing = false;   // record wall-clock times in reports

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != value.size() || value.empty())
        throw ValidationError("config: key '" + key + "' expects a number, got '" + value + "'");
    return v;
}

inline int parse_int(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(value, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != value.size() || value.empty())
        throw ValidationError("config: key '" + key + "' expects an integer, got '" + value + "'");
    return static_cast<int>(v);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError("config: key '" + key + "' expects true/false/1/0, got '" + value + "'");
}

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[40];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

} // namespace detail

/// Apply one `key = value` assignment.  Unknown keys are rejected rather than
/// ignored so a typo in a config file cannot silently fall back to a default.
inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "mode") cfg.mode = value;
    else if (key == "levels") cfg.levels = detail::parse_int(key, value);
    else if (key == "p") cfg.p = detail::parse_double(key, value);
    else if (key == "xc") cfg.xc = detail::parse_double(key, value);
    else if (key == "a") cfg.a = detail::parse_double(key, value);
    else if (key == "m") cfg.m = detail::parse_double(key, value);
    else if (key == "denoise") cfg.denoise = detail::parse_bool(key, value);
    else if (key == "h") cfg.h = detail::parse_double(key, value);
    else if (key == "patch") cfg.patch = detail::parse_int(key, value);
    else if (key == "search") cfg.search = detail::parse_int(key, value);
    else if (key == "bins") cfg.bins = detail::parse_int(key, value);
    else if (key == "jobs") cfg.jobs = detail::parse_int(key, value);
    else if (key == "depth") cfg.depth = detail::parse_int(key, value);
    else if (key == "timing") cfg.timing = detail::parse_bool(key, value);
    else throw ValidationError("config: unknown key '" + key + "'");
}

/// Overlay `key = value` lines onto an existing configuration.  Blank lines
/// and `#` comments are skipped; keys not mentioned keep their prior values.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(lineno)
                                  + " is not a 'key = value' assignment: '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config: line " + std::to_string(lineno) + " has an empty key");
        apply_config_entry(cfg, key, value);
    }
}

/// Overlay a config file onto an existing configuration.
inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    apply_config_text(cfg, text.str());
}

/// Serialize every setting as `key = value` lines.  Doubles are written with
/// enough digits that reading the text back reproduces the exact values.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "mode = " << cfg.mode << '\n'
        << "levels = " << cfg.levels << '\n'
        << "p = " << detail::format_double(cfg.p) << '\n'
        << "xc = " << detail::format_double(cfg.xc) << '\n'
        << "a = " << detail::format_double(cfg.a) << '\n'
        << "m = " << detail::format_double(cfg.m) << '\n'
        << "denoise = " << (cfg.denoise ? "true" : "false") << '\n'
        << "h = " << detail::format_double(cfg.h) << '\n'
        << "patch = " << cfg.patch << '\n'
        << "search = " << cfg.search << '\n'
        << "bins = " << cfg.bins << '\n'
        << "jobs = " << cfg.jobs << '\n'
        << "depth = " << cfg.depth << '\n'
        << "timing = " << (cfg.timing ? "true" : "false") << '\n';
    return out.str();
}

/// Translate the flat settings into the enhancement pipeline's configuration,
/// validating everything the pipeline will rely on.
inline PipelineConfig to_pipeline_config(const RunConfig& cfg) {
    PipelineConfig out;
    if (cfg.mode == "conventional") out.mode = Mode::conventional;
    else if (cfg.mode == "multistage") out.mode = Mode::multistage;
    else throw ValidationError("config: mode must be 'conventional' or 'multistage', got '"
                               + cfg.mode + "'");
    out.musica = MusicaParams(cfg.a, cfg.m, cfg.p, cfg.xc, cfg.levels);
    out.nlm = NlmParams(cfg.patch, cfg.search, cfg.h);
    out.denoise_enabled = cfg.denoise;
    return out;
}

} // namespace musica
