#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "commoncv/model.hpp"
#include "commoncv/simharness.hpp"

namespace commoncv {

/// Raw observations, header `group,value`, one record per line. Groups are
/// formed by label in order of first appearance and summarized with
/// summarize(). Accepts `\n` and `\r\n` line endings; blank lines are skipped.
Study read_raw_csv(std::istream& in);
Study read_raw_csv(const std::filesystem::path& path);

/// Per-group summaries, header `group,n,mean,sd`.
Study read_summary_csv(std::istream& in);
Study read_summary_csv(const std::filesystem::path& path);

/// Writes `group,n,mean,sd` with round-trip precision.
void write_summary_csv(std::ostream& out, const Study& study);

/// Simulation grid, header `phi,mu1..muk,n1..nk`. Every other SimConfig
/// field is copied from `defaults`; cell_index is the data row index.
std::vector<SimConfig> read_grid_csv(std::istream& in, const SimConfig& defaults);
std::vector<SimConfig> read_grid_csv(const std::filesystem::path& path, const SimConfig& defaults);

/// Header line of a grid file with k groups.
std::string grid_csv_header(std::size_t k);

/// One row per cell: config echo followed by coverage, avg length and
/// failure count per method. All rows must share k and method list.
void write_sim_results_csv(std::ostream& out, const std::vector<SimResult>& rows);

/// Parses a whole field as a finite decimal number ('.' separator only).
/// Returns false on any leftover characters, NaN or infinity.
bool parse_decimal(std::string_view field, double& value) noexcept;

}  // namespace commoncv
