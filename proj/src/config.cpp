#include "fpflow/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fpflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Removes a trailing comment: '#' or ';' at line start or after whitespace.
std::string strip_comment(const std::string& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((line[i] == '#' || line[i] == ';') &&
            (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
            return line.substr(0, i);
    }
    return line;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& origin) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config " + origin + ":" + std::to_string(lineno) +
                                         ": unterminated section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::runtime_error("config " + origin + ":" + std::to_string(lineno) +
                                         ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config " + origin + ":" + std::to_string(lineno) +
                                     ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config " + origin + ":" + std::to_string(lineno) +
                                     ": empty key");
        cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("config override '" + assignment + "' is not of the form key=value");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty())
        throw std::runtime_error("config override '" + assignment + "' has an empty key");
    set(key, trim(assignment.substr(eq + 1)));
}

bool Config::has(const std::string& key) const {
    read_.insert(key);
    return values_.count(key) != 0;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    read_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    read_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error("config key '" + key + "': cannot parse '" + it->second +
                                 "' as a number");
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    read_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw std::runtime_error("config key '" + key + "': cannot parse '" + it->second +
                                 "' as an integer");
    return static_cast<int>(v);
}

std::vector<std::string> Config::unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_)
        if (!read_.count(key)) out.push_back(key);
    return out;
}

void Config::write(std::ostream& os) const {
    for (const auto& [key, value] : values_) os << key << " = " << value << "\n";
}

RunConfig RunConfig::from_config(const Config& cfg) {
    RunConfig rc;
    rc.d = cfg.get_double("geometry.d", rc.d);
    rc.eps = cfg.get_double("geometry.eps", rc.eps);
    rc.m = cfg.get_int("coefficients.m", rc.m);
    rc.coeff_h = cfg.get_double("coefficients.h", rc.coeff_h);
    rc.coeff_circle_segments = cfg.get_int("coefficients.circle_segments", rc.coeff_circle_segments);
    rc.decay_tol = cfg.get_double("coefficients.decay_tol", rc.decay_tol);
    rc.macro_h = cfg.get_double("macro.h", rc.macro_h);
    rc.alpha = cfg.get_double("macro.alpha", rc.alpha);
    rc.lid_velocity = cfg.get_double("macro.lid_velocity", rc.lid_velocity);
    rc.bottom_pressure = cfg.get_double("macro.bottom_pressure", rc.bottom_pressure);
    rc.pore_h_porous = cfg.get_double("pore.h_porous", rc.pore_h_porous);
    rc.pore_h_free = cfg.get_double("pore.h_free", rc.pore_h_free);
    rc.pore_circle_segments = cfg.get_int("pore.circle_segments", rc.pore_circle_segments);
    rc.n_samples = cfg.get_int("pore.n_samples", rc.n_samples);
    rc.workers = cfg.get_int("pore.workers", rc.workers);
    rc.samples_per_line = cfg.get_int("sampling.per_line", rc.samples_per_line);
    rc.section_x2 = cfg.get_double("sampling.x2", rc.section_x2);
    rc.section_x1 = cfg.get_double("sampling.x1", rc.section_x1);
    rc.out_dir = cfg.get_string("output.dir", rc.out_dir);

    const auto leftovers = cfg.unread_keys();
    if (!leftovers.empty()) {
        std::string msg = "unknown configuration key(s):";
        for (const auto& k : leftovers) msg += " " + k;
        throw std::runtime_error(msg);
    }

    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::runtime_error("configuration: " + what);
    };
    require(rc.d > 0.0 && rc.d < 1.0, "geometry.d must lie strictly between 0 and 1");
    require(rc.eps > 0.0, "geometry.eps must be positive");
    require(rc.m >= 2, "coefficients.m must be at least 2");
    require(rc.coeff_h > 0.0, "coefficients.h must be positive");
    require(rc.coeff_circle_segments >= 8, "coefficients.circle_segments must be at least 8");
    require(rc.decay_tol > 0.0, "coefficients.decay_tol must be positive");
    require(rc.macro_h > 0.0, "macro.h must be positive");
    require(rc.alpha > 0.0, "macro.alpha must be positive");
    require(rc.pore_h_porous > 0.0 && rc.pore_h_free > 0.0, "pore mesh sizes must be positive");
    require(rc.pore_circle_segments >= 8, "pore.circle_segments must be at least 8");
    require(rc.n_samples >= 1, "pore.n_samples must be at least 1");
    require(rc.workers >= 1, "pore.workers must be at least 1");
    require(rc.samples_per_line >= 2, "sampling.per_line must be at least 2");
    return rc;
}

Config RunConfig::to_config() const {
    Config cfg;
    cfg.set("geometry.d", format_double(d));
    cfg.set("geometry.eps", format_double(eps));
    cfg.set("coefficients.m", std::to_string(m));
    cfg.set("coefficients.h", format_double(coeff_h));
    cfg.set("coefficients.circle_segments", std::to_string(coeff_circle_segments));
    cfg.set("coefficients.decay_tol", format_double(decay_tol));
    cfg.set("macro.h", format_double(macro_h));
    cfg.set("macro.alpha", format_double(alpha));
    cfg.set("macro.lid_velocity", format_double(lid_velocity));
    cfg.set("macro.bottom_pressure", format_double(bottom_pressure));
    cfg.set("pore.h_porous", format_double(pore_h_porous));
    cfg.set("pore.h_free", format_double(pore_h_free));
    cfg.set("pore.circle_segments", std::to_string(pore_circle_segments));
    cfg.set("pore.n_samples", std::to_string(n_samples));
    cfg.set("pore.workers", std::to_string(workers));
    cfg.set("sampling.per_line", std::to_string(samples_per_line));
    cfg.set("sampling.x2", format_double(section_x2));
    cfg.set("sampling.x1", format_double(section_x1));
    cfg.set("output.dir", out_dir);
    return cfg;
}

}  // namespace fpflow
