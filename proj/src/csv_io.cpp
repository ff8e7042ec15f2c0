#include "fpflow/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fpflow {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream is(line);
    while (std::getline(is, tok, sep)) out.push_back(tok);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("profile csv " + path + ": malformed number '" + s + "'");
    }
}

}  // namespace

std::string CrossSection::label() const {
    std::ostringstream os;
    os << (axis == Axis::horizontal ? "x2_" : "x1_");
    // Compact coordinate label: trim trailing zeros of a fixed format.
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", coord);
    for (char* c = buf; *c; ++c)
        if (*c == '.') *c = 'p';  // file-name friendly
    os << buf;
    return os.str();
}

void ProfileSet::add(const std::string& quantity, std::vector<double> column) {
    if (column.size() != s.size())
        throw std::invalid_argument("profile set: column '" + quantity +
                                    "' length does not match the abscissae");
    quantities.push_back(quantity);
    values.push_back(std::move(column));
}

Profile ProfileSet::get(const std::string& quantity) const {
    for (std::size_t k = 0; k < quantities.size(); ++k) {
        if (quantities[k] != quantity) continue;
        Profile p;
        p.quantity = quantity;
        p.section = section;
        p.s = s;
        p.value = values[k];
        p.count = count;
        return p;
    }
    throw std::invalid_argument("profile set: no quantity '" + quantity + "'");
}

void write_profile_csv(const std::string& path, const ProfileSet& set) {
    if (set.values.size() != set.quantities.size())
        throw std::invalid_argument("profile set: column/name count mismatch");
    for (const auto& col : set.values)
        if (col.size() != set.s.size())
            throw std::invalid_argument("profile set: column length mismatch");
    if (set.count.size() != set.s.size())
        throw std::invalid_argument("profile set: count length mismatch");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("profile csv " + path + ": cannot open for writing");
    out << "# section,"
        << (set.section.axis == CrossSection::Axis::horizontal ? "horizontal" : "vertical") << ","
        << fmt(set.section.coord) << "\n";
    out << "s";
    for (const auto& q : set.quantities) out << "," << q;
    out << ",count\n";
    for (std::size_t i = 0; i < set.s.size(); ++i) {
        out << fmt(set.s[i]);
        for (const auto& col : set.values) out << "," << fmt(col[i]);
        out << "," << set.count[i] << "\n";
    }
    if (!out) throw std::runtime_error("profile csv " + path + ": write failed");
}

ProfileSet read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("profile csv " + path + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("profile csv " + path + ": empty file");
    auto head = split(line, ',');
    if (head.size() != 3 || head[0] != "# section")
        throw std::runtime_error("profile csv " + path + ": missing section header");
    ProfileSet set;
    if (head[1] == "horizontal")
        set.section.axis = CrossSection::Axis::horizontal;
    else if (head[1] == "vertical")
        set.section.axis = CrossSection::Axis::vertical;
    else
        throw std::runtime_error("profile csv " + path + ": unknown axis '" + head[1] + "'");
    set.section.coord = parse_double(head[2], path);

    if (!std::getline(in, line))
        throw std::runtime_error("profile csv " + path + ": missing column header");
    auto cols = split(line, ',');
    if (cols.size() < 3 || cols.front() != "s" || cols.back() != "count")
        throw std::runtime_error("profile csv " + path +
                                 ": column header must be s,<quantities...>,count");
    set.quantities.assign(cols.begin() + 1, cols.end() - 1);
    set.values.assign(set.quantities.size(), {});

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != cols.size())
            throw std::runtime_error("profile csv " + path + ": row has " +
                                     std::to_string(f.size()) + " fields, expected " +
                                     std::to_string(cols.size()));
        set.s.push_back(parse_double(f[0], path));
        for (std::size_t k = 0; k < set.quantities.size(); ++k)
            set.values[k].push_back(parse_double(f[1 + k], path));
        const double cnt = parse_double(f.back(), path);
        if (cnt < 0 || cnt != std::floor(cnt))
            throw std::runtime_error("profile csv " + path + ": count must be a whole number");
        set.count.push_back(static_cast<int>(cnt));
    }
    return set;
}

ProfileMetrics compare_profiles(const Profile& candidate, const Profile& reference) {
    if (candidate.section.axis != reference.section.axis ||
        std::abs(candidate.section.coord - reference.section.coord) > 1e-12)
        throw std::invalid_argument("compare_profiles: profiles lie on different cross-sections");
    if (candidate.size() != reference.size())
        throw std::invalid_argument("compare_profiles: profiles have different sample counts");
    ProfileMetrics m;
    double num = 0.0, den = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        if (std::abs(candidate.s[i] - reference.s[i]) > 1e-12)
            throw std::invalid_argument(
                "compare_profiles: profiles sampled at different abscissae");
        if (candidate.count[i] == 0 || reference.count[i] == 0) continue;
        const double d = candidate.value[i] - reference.value[i];
        num += d * d;
        den += reference.value[i] * reference.value[i];
        sum += d;
        m.max_abs = std::max(m.max_abs, std::abs(d));
        ++m.n_used;
    }
    if (m.n_used > 0) m.mean_signed = sum / m.n_used;
    if (den > 0.0)
        m.rel_l2 = std::sqrt(num / den);
    else
        m.rel_l2 = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return m;
}

double total_variation(const Profile& profile) {
    double tv = 0.0;
    bool have = false;
    double prev = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.count[i] == 0) continue;
        if (have) tv += std::abs(profile.value[i] - prev);
        prev = profile.value[i];
        have = true;
    }
    return tv;
}

}  // namespace fpflow
