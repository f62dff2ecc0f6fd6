#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrtcee/data.hpp"

namespace mrtcee {

/// Column mapping for panel CSV files.
///
/// Decision-point indices in files are 1-based. Probability columns default to
/// `prob_0 .. prob_K` discovered from the header; a constant randomization
/// vector may replace them entirely. Columns not named here become features.
struct CsvSchema {
    std::string id_col = "id";
    std::string t_col = "t";
    std::string avail_col = "avail";
    std::string trt_col = "trt";
    std::string outcome_col = "outcome";
    std::vector<std::string> prob_cols;
    std::optional<Eigen::VectorXd> constant_probs;
    std::optional<int> declared_k;
};

/// Parses and validates a panel. Throws ValidationError naming the first
/// problem: missing column, non-numeric cell, ragged panel, duplicate
/// (id, t), or any violated record invariant.
MrtDataset read_csv(std::istream& in, const CsvSchema& schema = {});
MrtDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes the canonical layout `id,t,avail,trt,prob_0..prob_K,outcome,<features>`
/// with shortest round-trip formatting for reals.
void write_csv(std::ostream& out, const MrtDataset& data);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict full-field numeric parse; nullopt on anything else.
std::optional<double> parse_double(std::string_view text);

std::vector<std::string> split_fields(std::string_view line, char sep = ',');

/// Numeric rows with exactly `cols` entries. Blank lines and lines starting
/// with '#' are skipped; a non-numeric first row is taken as a header.
Eigen::MatrixXd load_numeric_matrix(const std::filesystem::path& path, int cols);

}  // namespace mrtcee
