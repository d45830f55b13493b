#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sigreg/path.hpp"

// CSV exchange format. Paths travel in long form — header
// `sample_id,time,c1,...,cd`, one row per sampling point, rows grouped by
// sample with times ascending inside each group. Targets are
// `sample_id,y`, one row per sample, and must match the paths file exactly.
// Doubles are written with the shortest representation that parses back to
// the same value, so a write/read round trip is exact and reruns are
// byte-identical.

namespace sigreg {

struct PathsCsv {
    std::vector<SampledPath> paths;
    std::vector<std::string> ids;  // unique, in file order
};

PathsCsv read_paths_csv(const std::filesystem::path& file);

// Targets aligned to `ids` (the order of the paths file). Missing, unknown,
// or duplicate sample ids are DataErrors.
Eigen::VectorXd read_targets_csv(const std::filesystem::path& file,
                                 const std::vector<std::string>& ids);

void write_paths_csv(const std::filesystem::path& file,
                     const std::vector<SampledPath>& paths,
                     const std::vector<std::string>& ids);

void write_targets_csv(const std::filesystem::path& file,
                       const Eigen::VectorXd& targets,
                       const std::vector<std::string>& ids);

// Shortest round-trip decimal form of x.
std::string format_double(double x);

// Zero-padded default ids: s0001, s0002, ...
std::vector<std::string> default_sample_ids(std::size_t n);

// Writes through a temporary file in the same directory and renames, so a
// failure never leaves a truncated file at `file`.
void write_text_atomic(const std::filesystem::path& file,
                       std::string_view content);

}  // namespace sigreg
