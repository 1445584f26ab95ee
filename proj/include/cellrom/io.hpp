#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cellrom/profile.hpp"
#include "cellrom/types.hpp"

namespace cellrom {

/// Simple numeric CSV: one header row naming the columns, '#'-prefixed lines
/// treated as comments and collected separately.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    std::vector<std::string> comments;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns,
               const std::vector<std::string>& comments = {});

/// Profiles on disk are two-column CSVs `t_s,<value>` with zero-order hold.
Profile read_profile_csv(const std::filesystem::path& path);
void write_profile_csv(const std::filesystem::path& path, const Profile& p,
                       const std::string& value_header);

/// Trajectory CSV schema: t_s,T_avg_K,T_max_K,T_out_K. Reduced models fill
/// the plant-only columns with nan.
void write_trajectory_csv(const std::filesystem::path& path, const SimulationResult& r);
SimulationResult read_trajectory_csv(const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

/// FNV-1a over a canonical serialization; used to stamp outputs with the
/// configuration that produced them.
std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(std::uint64_t h);

std::string format_double(double v);

}  // namespace cellrom
