#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "pllci/core.hpp"

namespace pllci {

struct ReadOptions {
  char delimiter = ',';
  bool has_header = true;
};

/// Reads a delimited text table and factorizes every column to 0-based
/// codes in first-appearance order, keeping the tokens as labels. Without a
/// header the columns are named V1..Vm. Fields are not quoted, so tokens may
/// not contain the delimiter. Blank lines are skipped.
///
/// Throws DataError on empty input, ragged rows and empty fields; messages
/// carry the 1-based line number.
Dataset read_delimited(std::istream& in, const ReadOptions& options = {});
Dataset read_delimited(const std::filesystem::path& path, const ReadOptions& options = {});

/// Writes a header of column names and one line per row, using labels when
/// present and codes otherwise. read_delimited inverts it.
void write_delimited(const Dataset& data, std::ostream& out, char delimiter = ',');
void write_delimited(const Dataset& data, const std::filesystem::path& path,
                     char delimiter = ',');

enum class Dependence { null_ci, dependent };

std::string_view to_string(Dependence d);
std::optional<Dependence> parse_dependence(std::string_view s);

/// Weight with which Y is replaced by X mod |Y| in dependent datasets.
inline constexpr double kDependentMixing = 0.3;

struct GenConfig {
  std::size_t n = 1000;
  /// Level counts in column order (X, Y, Z1..Zk); at least two entries.
  std::vector<Code> levels;
  Dependence dependence = Dependence::null_ci;
  std::uint64_t seed = 1;
};

/// Synthetic dataset with columns X, Y, Z1..Zk.
///
/// Each Z_i is uniform and independent. For every z combination, P(X | z)
/// and P(Y | z) are normalized uniform(0, 1] weights derived from the seed
/// and the combination by SplitMix64 hashing; X and Y are then drawn
/// independently given z, so X is independent of Y given Z while both
/// depend on Z. In dependent mode Y is replaced by X mod |Y| with
/// probability kDependentMixing.
///
/// Row draws come from std::mt19937_64 seeded with `seed`, mapped to
/// [0, 1) by taking the top 53 bits, so output is bit-identical on every
/// platform. Columns carry labels "0".."L-1" so the configured level count
/// is kept even when a level is not drawn.
///
/// Throws std::invalid_argument for n == 0, fewer than two variables or a
/// level count below 2.
Dataset generate(const GenConfig& config);

}  // namespace pllci
