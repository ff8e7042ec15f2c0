#ifndef FPFLOW_CONFIG_HPP
#define FPFLOW_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fpflow {

/// Flat key=value store with optional [section] headers. A key inside
/// [sec] is addressed as "sec.key"; dotted keys may also be written
/// literally. '#' and ';' start comments (at line start or after
/// whitespace), values keep everything after the FIRST '=' with outer
/// whitespace trimmed. Reads are tracked so that consumers can reject
/// configuration keys nobody understands.
class Config {
public:
    Config() = default;

    static Config parse(std::istream& is, const std::string& origin);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    /// Applies one "key=value" command-line override; throws without '='.
    void set_override(const std::string& assignment);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    /// Keys present in the store that no accessor ever asked about.
    std::vector<std::string> unread_keys() const;

    /// Deterministic dotted "key = value" lines, sorted by key.
    void write(std::ostream& os) const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

/// Every knob of the full comparison pipeline with its production default.
struct RunConfig {
    // periodic microstructure
    double d = 0.5;     ///< obstacle diameter relative to the cell
    double eps = 0.05;  ///< cell size relative to the channel height

    // effective-coefficient discretization (unit cell and stripe)
    int m = 4;                       ///< stripe half-height in cells
    double coeff_h = 0.05;           ///< target mesh size on the unit cell
    int coeff_circle_segments = 63;  ///< polygon segments on the obstacle
    double decay_tol = 1e-6;         ///< stripe far-field decay gate

    // coupled macroscopic solves
    double macro_h = 1.0 / 64.0;
    double alpha = 1.0;  ///< dimensionless slip coefficient of the classical model
    double lid_velocity = 1.0;
    double bottom_pressure = 0.0;

    // resolved pore-scale ensemble
    double pore_h_porous = 0.01;
    double pore_h_free = 0.02;
    int pore_circle_segments = 16;
    int n_samples = 16;
    int workers = 4;

    // cross-section sampling
    int samples_per_line = 400;
    double section_x2 = 0.0;  ///< horizontal comparison line (the interface)
    double section_x1 = 0.7;  ///< vertical comparison line

    // artifact directory; empty disables writing
    std::string out_dir = "out";

    /// Reads every supported key and throws on leftovers or bad values.
    static RunConfig from_config(const Config& cfg);
    /// Inverse of from_config (round-trips through parse exactly).
    Config to_config() const;
};

}  // namespace fpflow

#endif  // FPFLOW_CONFIG_HPP
