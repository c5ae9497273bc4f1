#include "pllci/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace pllci {

namespace {

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

Dataset read_delimited(std::istream& in, const ReadOptions& options) {
  std::vector<CategoricalColumn> columns;
  std::vector<std::unordered_map<std::string, Code>> index;
  std::string line;
  std::size_t line_no = 0;
  bool have_shape = false;

  auto init_columns = [&](std::size_t m, const std::vector<std::string_view>* names) {
    columns.resize(m);
    index.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
      columns[c].name = names ? std::string((*names)[c]) : "V" + std::to_string(c + 1);
    }
    have_shape = true;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, options.delimiter);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c].empty()) {
        throw DataError(at_line(line_no) + "missing field " + std::to_string(c + 1));
      }
    }
    if (!have_shape) {
      if (options.has_header) {
        init_columns(fields.size(), &fields);
        continue;
      }
      init_columns(fields.size(), nullptr);
    }
    if (fields.size() != columns.size()) {
      throw DataError(at_line(line_no) + "expected " + std::to_string(columns.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto& col = columns[c];
      auto [it, inserted] = index[c].try_emplace(std::string(fields[c]), col.levels);
      if (inserted) {
        col.labels.emplace_back(fields[c]);
        ++col.levels;
      }
      col.codes.push_back(it->second);
    }
  }
  if (in.bad()) throw DataError("read error");
  if (!have_shape) throw DataError("empty input");
  if (columns.front().codes.empty()) throw DataError("input has a header but no data rows");
  return Dataset(std::move(columns));
}

Dataset read_delimited(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_delimited(in, options);
}

void write_delimited(const Dataset& data, std::ostream& out, char delimiter) {
  auto put = [&](const std::string& token, const std::string& where) {
    if (token.find(delimiter) != std::string::npos) {
      throw DataError(where + " contains the delimiter and cannot be written unquoted");
    }
    out << token;
  };
  const auto& cols = data.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << delimiter;
    put(cols[c].name, "column name '" + cols[c].name + "'");
  }
  out << '\n';
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << delimiter;
      put(cols[c].label_of(cols[c].codes[r]), "a label of column '" + cols[c].name + "'");
    }
    out << '\n';
  }
  if (!out) throw DataError("write error");
}

void write_delimited(const Dataset& data, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_delimited(data, out, delimiter);
  out.flush();
  if (!out) throw DataError("write error on " + path.string());
}

std::string_view to_string(Dependence d) {
  return d == Dependence::null_ci ? "null" : "dependent";
}

std::optional<Dependence> parse_dependence(std::string_view s) {
  if (s == "null" || s == "null_ci") return Dependence::null_ci;
  if (s == "dependent") return Dependence::dependent;
  return std::nullopt;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Cumulative weights of P(var | z) for one stratum.
std::vector<double> conditional_cdf(std::uint64_t seed, std::uint64_t var, std::uint64_t slice,
                                    Code levels) {
  std::vector<double> cdf(levels);
  double acc = 0.0;
  const std::uint64_t base = splitmix64(splitmix64(splitmix64(seed) ^ var) ^ slice);
  for (Code l = 0; l < levels; ++l) {
    // (0, 1]: strictly positive so no cell is a structural zero.
    acc += static_cast<double>((splitmix64(base ^ l) >> 11) + 1) * 0x1.0p-53;
    cdf[l] = acc;
  }
  return cdf;
}

Code draw(const std::vector<double>& cdf, double u) {
  const double target = u * cdf.back();
  for (Code l = 0; l + 1 < cdf.size(); ++l) {
    if (target < cdf[l]) return l;
  }
  return static_cast<Code>(cdf.size() - 1);
}

}  // namespace

Dataset generate(const GenConfig& config) {
  if (config.n == 0) throw std::invalid_argument("sample size must be positive");
  if (config.levels.size() < 2) throw std::invalid_argument("need at least two variables");
  for (auto l : config.levels) {
    if (l < 2) throw std::invalid_argument("every variable needs at least two levels");
  }

  const std::size_t k = config.levels.size() - 2;
  const Code lx = config.levels[0];
  const Code ly = config.levels[1];
  std::vector<CategoricalColumn> columns(config.levels.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto& col = columns[c];
    col.name = c == 0 ? "X" : c == 1 ? "Y" : "Z" + std::to_string(c - 1);
    col.levels = config.levels[c];
    col.codes.resize(config.n);
    for (Code l = 0; l < col.levels; ++l) col.labels.push_back(std::to_string(l));
  }

  std::mt19937_64 rng(config.seed);
  auto uniform = [&rng] { return unit_interval(rng()); };
  std::unordered_map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>> cdfs;

  for (std::size_t r = 0; r < config.n; ++r) {
    std::uint64_t slice = 0;
    std::uint64_t stride = 1;
    for (std::size_t i = 0; i < k; ++i) {
      const Code lz = config.levels[i + 2];
      const auto z = static_cast<Code>(uniform() * lz);
      columns[i + 2].codes[r] = z;
      slice += z * stride;
      stride *= lz;
    }
    auto it = cdfs.find(slice);
    if (it == cdfs.end()) {
      it = cdfs.emplace(slice, std::pair{conditional_cdf(config.seed, 0, slice, lx),
                                         conditional_cdf(config.seed, 1, slice, ly)})
               .first;
    }
    const Code x = draw(it->second.first, uniform());
    Code y = draw(it->second.second, uniform());
    if (config.dependence == Dependence::dependent) {
      if (uniform() < kDependentMixing) y = x % ly;
    }
    columns[0].codes[r] = x;
    columns[1].codes[r] = y;
  }
  return Dataset(std::move(columns));
}

}  // namespace pllci
