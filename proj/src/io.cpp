#include "cellrom/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cellrom {

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return columns[i];
    throw std::invalid_argument("CSV: missing column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.front() == '#') {
            table.comments.push_back(line);
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        if (!have_header) {
            while (std::getline(ss, field, ','))
                table.header.push_back(field);
            table.columns.resize(table.header.size());
            have_header = true;
            continue;
        }
        std::size_t col = 0;
        while (std::getline(ss, field, ',')) {
            if (col >= table.columns.size())
                throw std::runtime_error(path.string() + ": row wider than header");
            try {
                table.columns[col].push_back(std::stod(field));
            } catch (const std::exception&) {
                throw std::runtime_error(path.string() + ": non-numeric field '" + field + "'");
            }
            ++col;
        }
        if (col != table.columns.size())
            throw std::runtime_error(path.string() + ": row narrower than header");
    }
    if (!have_header)
        throw std::runtime_error(path.string() + ": empty CSV");
    return table;
}

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns,
               const std::vector<std::string>& comments) {
    if (header.size() != columns.size())
        throw std::invalid_argument("write_csv: header/column mismatch");
    if (!path.parent_path().empty())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    for (const auto& c : comments)
        out << (c.rfind('#', 0) == 0 ? "" : "# ") << c << '\n';
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    std::size_t rows = columns.empty() ? 0 : columns.front()->size();
    for (const auto* c : columns)
        if (c->size() != rows)
            throw std::invalid_argument("write_csv: ragged columns");
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << format_double((*columns[i])[r]) << (i + 1 < columns.size() ? "," : "\n");
}

Profile read_profile_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    if (t.header.size() != 2 || t.header[0] != "t_s")
        throw std::runtime_error(path.string() + ": expected header t_s,<value>");
    return Profile(t.columns[0], t.columns[1]);
}

void write_profile_csv(const std::filesystem::path& path, const Profile& p,
                       const std::string& value_header) {
    write_csv(path, {"t_s", value_header}, {&p.times(), &p.values()});
}

void write_trajectory_csv(const std::filesystem::path& path, const SimulationResult& r) {
    std::vector<double> nan_col;
    const std::vector<double>* t_max = &r.t_max;
    const std::vector<double>* t_out = &r.t_out;
    if (r.t_max.empty() || r.t_out.empty()) {
        nan_col.assign(r.t.size(), std::numeric_limits<double>::quiet_NaN());
        if (r.t_max.empty())
            t_max = &nan_col;
        if (r.t_out.empty())
            t_out = &nan_col;
    }
    write_csv(path, {"t_s", "T_avg_K", "T_max_K", "T_out_K"}, {&r.t, &r.t_avg, t_max, t_out});
}

SimulationResult read_trajectory_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    SimulationResult r;
    r.t = t.column("t_s");
    r.t_avg = t.column("T_avg_K");
    r.t_max = t.column("T_max_K");
    r.t_out = t.column("T_out_K");
    auto all_nan = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isnan(x))
                return false;
        return !v.empty();
    };
    if (all_nan(r.t_max))
        r.t_max.clear();
    if (all_nan(r.t_out))
        r.t_out.clear();
    return r;
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
    if (!path.parent_path().empty())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cellrom
