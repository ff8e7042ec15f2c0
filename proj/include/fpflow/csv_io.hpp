#ifndef FPFLOW_CSV_IO_HPP
#define FPFLOW_CSV_IO_HPP

/// Sampled cross-section profiles, their CSV serialization, and the
/// comparison metrics used by the validation reports.

#include <string>
#include <vector>

namespace fpflow {

/// A sampling line: horizontal (fixed y, moving coordinate x) or vertical
/// (fixed x, moving coordinate y).
struct CrossSection {
    enum class Axis { horizontal, vertical };
    Axis axis = Axis::horizontal;
    double coord = 0.0;  ///< the fixed coordinate of the line

    /// Short label used in artifact file names, e.g. "x2_0" / "x1_0p7".
    std::string label() const;
};

/// One quantity sampled along a cross-section. `count[i]` is the number of
/// contributing samples at abscissa `s[i]`: 1 for a plain field sample, the
/// member count for an ensemble mean, 0 when every member was masked there
/// (e.g. the point lies inside an obstacle).
struct Profile {
    std::string quantity;
    CrossSection section;
    std::vector<double> s;
    std::vector<double> value;
    std::vector<int> count;

    std::size_t size() const { return s.size(); }
};

/// Several quantities sampled along one cross-section at shared abscissae
/// with a shared mask — one CSV file's worth of data.
struct ProfileSet {
    CrossSection section;
    std::vector<double> s;
    std::vector<std::string> quantities;       ///< column names
    std::vector<std::vector<double>> values;   ///< values[k][i] for quantities[k]
    std::vector<int> count;

    void add(const std::string& quantity, std::vector<double> column);
    /// Extracts one quantity as a stand-alone profile; throws when absent.
    Profile get(const std::string& quantity) const;
};

/// Writes/reads the profile CSV format (see docs/formats.md). Values are
/// printed with 17 significant digits, so a write/read round trip
/// reproduces every sample to better than 1e-14 relative.
void write_profile_csv(const std::string& path, const ProfileSet& set);
ProfileSet read_profile_csv(const std::string& path);

struct ProfileMetrics {
    double rel_l2 = 0.0;       ///< l2 norm of (a-b) divided by l2 norm of b
    double max_abs = 0.0;      ///< max |a-b|
    double mean_signed = 0.0;  ///< mean of (a-b)
    int n_used = 0;            ///< abscissae where both profiles have count > 0
};

/// Compares a candidate profile against a reference profile sampled at the
/// same abscissae. Pairs where either side has count == 0 are skipped.
/// Throws when the abscissae (or sections) differ.
ProfileMetrics compare_profiles(const Profile& candidate, const Profile& reference);

/// Total variation (sum of absolute successive differences) over the
/// unmasked subsequence of a profile — a measure of oscillation.
double total_variation(const Profile& profile);

}  // namespace fpflow

#endif  // FPFLOW_CSV_IO_HPP
