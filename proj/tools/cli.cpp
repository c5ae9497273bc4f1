#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pllci/bench.hpp"
#include "pllci/citest.hpp"
#include "pllci/io.hpp"

namespace pllci::cli {

namespace {

// Raised for malformed flag values detected after CLI11 parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t resolve(const Dataset& data, const std::string& ref) {
  auto idx = data.find_column(ref);
  if (!idx) throw SpecError("unknown column '" + ref + "'");
  return *idx;
}

std::vector<std::size_t> resolve_list(const Dataset& data, const std::string& refs) {
  std::vector<std::size_t> out;
  for (const auto& r : split_list(refs, ',')) out.push_back(resolve(data, r));
  return out;
}

char parse_delimiter(const std::string& s) {
  if (s == "tab" || s == "\\t" || s == "\t") return '\t';
  if (s.size() != 1) throw UsageError("delimiter must be a single character or 'tab'");
  return s[0];
}

Method parse_method_flag(const std::string& s) {
  auto m = parse_method(s);
  if (!m) throw UsageError("unknown method '" + s + "'");
  return *m;
}

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string cs_names(const Dataset& data, const TestSpec& spec) {
  std::string s;
  for (std::size_t i = 0; i < spec.cs.size(); ++i) {
    if (i) s += ',';
    s += data.column(spec.cs[i]).name;
  }
  return s;
}

struct DataFlags {
  std::string path;
  std::string delimiter = ",";
  bool no_header = false;

  void add(CLI::App* app) {
    app->add_option("--data", path, "Delimited data file")->required();
    app->add_option("--delimiter", delimiter, "Field delimiter (character or 'tab')");
    app->add_flag("--no-header", no_header, "First line is data, columns are named V1..Vm");
  }

  Dataset load() const {
    return read_delimited(std::filesystem::path(path),
                          ReadOptions{parse_delimiter(delimiter), !no_header});
  }
};

struct TestFlags {
  DataFlags data;
  std::string x;
  std::string y;
  std::string cs;
  std::string method = "closed";
  bool adjust_dof = false;
  std::string format = "json";
};

struct BatchFlags {
  DataFlags data;
  std::string pairs = "all";
  std::string cs;
  std::size_t workers = 1;
  std::string method = "closed";
  bool adjust_dof = false;
  std::string format = "jsonl";
};

struct GenFlags {
  std::size_t n = 0;
  std::string levels;
  std::string mode = "null";
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string delimiter = ",";
};

struct BenchFlags {
  std::string test_counts;
  std::string sample_sizes;
  std::string scenarios;
  std::size_t repetitions = 0;
  std::string methods;
  std::size_t batch_workers = 0;
  std::uint64_t seed = 0;
  std::string format = "tsv";
  std::string out = "-";
};

std::vector<std::size_t> parse_counts(const std::string& s, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) {
      throw UsageError(std::string("invalid ") + what + " '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw DataError("write error on " + path);
}

int cmd_test(const TestFlags& f, std::ostream& out) {
  const Dataset data = f.data.load();
  const Method method = parse_method_flag(f.method);
  TestSpec spec{resolve(data, f.x), resolve(data, f.y), resolve_list(data, f.cs)};
  const auto result = ci_test(data, spec, {method, f.adjust_dof});
  if (f.format == "json") {
    out << result_json(data, spec, result).dump(2) << '\n';
  } else {
    out << result_tsv_header() << '\n' << result_tsv_row(data, spec, result) << '\n';
  }
  return kOk;
}

std::vector<TestSpec> read_pairs(const Dataset& data, const std::string& path,
                                 const std::vector<std::size_t>& cs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs file " + path);
  std::vector<TestSpec> specs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string x, y, extra, rest;
    if (!(fields >> x) || x.front() == '#') continue;
    if (!(fields >> y)) {
      throw DataError("pairs file line " + std::to_string(line_no) + ": expected 'x y [cs]'");
    }
    fields >> extra;
    if (fields >> rest) {
      throw DataError("pairs file line " + std::to_string(line_no) + ": too many fields");
    }
    TestSpec spec{resolve(data, x), resolve(data, y), extra.empty() ? cs : resolve_list(data, extra)};
    specs.push_back(std::move(spec));
  }
  return specs;
}

int cmd_batch(const BatchFlags& f, std::ostream& out) {
  const Dataset data = f.data.load();
  const Method method = parse_method_flag(f.method);
  const auto cs = resolve_list(data, f.cs);
  const auto specs = f.pairs == "all" ? all_pairs(data, cs) : read_pairs(data, f.pairs, cs);
  const auto results = batch_screen(data, specs, f.workers, {method, f.adjust_dof});
  std::ostringstream text;
  if (f.format == "tsv") text << result_tsv_header() << '\n';
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (f.format == "jsonl") {
      text << result_json(data, specs[i], results[i]).dump() << '\n';
    } else {
      text << result_tsv_row(data, specs[i], results[i]) << '\n';
    }
  }
  out << text.str();
  return kOk;
}

int cmd_gen(const GenFlags& f, std::ostream& out) {
  GenConfig config;
  config.n = f.n;
  for (auto l : parse_counts(f.levels, "level count")) config.levels.push_back(static_cast<Code>(l));
  const auto mode = parse_dependence(f.mode);
  if (!mode) throw UsageError("unknown mode '" + f.mode + "'");
  config.dependence = *mode;
  config.seed = f.seed;
  const char delim = parse_delimiter(f.delimiter);
  Dataset data;
  try {
    data = generate(config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (f.out == "-") {
    write_delimited(data, out, delim);
  } else {
    write_delimited(data, std::filesystem::path(f.out), delim);
  }
  return kOk;
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  BenchConfig config;
  if (!f.test_counts.empty()) config.test_counts = parse_counts(f.test_counts, "test count");
  if (!f.sample_sizes.empty()) config.sample_sizes = parse_counts(f.sample_sizes, "sample size");
  if (!f.scenarios.empty()) {
    config.scenarios.clear();
    for (const auto& s : split_list(f.scenarios, ';')) {
      BenchScenario scenario;
      if (s != "none") {
        for (auto l : parse_counts(s, "level count")) {
          scenario.cs_levels.push_back(static_cast<Code>(l));
        }
      }
      config.scenarios.push_back(std::move(scenario));
    }
  }
  if (f.repetitions > 0) config.repetitions = f.repetitions;
  if (!f.methods.empty()) {
    config.methods.clear();
    for (const auto& m : split_list(f.methods, ',')) config.methods.push_back(parse_method_flag(m));
  }
  config.batch_workers = f.batch_workers;
  if (f.seed != 0) config.seed = f.seed;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto records = run_bench(config);
  write_text(f.out, emit_report(records, f.format == "markdown" ? ReportFormat::markdown
                                                               : ReportFormat::tsv),
             out);
  return kOk;
}

}  // namespace

nlohmann::ordered_json result_json(const Dataset& data, const TestSpec& spec,
                                   const TestResult& r) {
  nlohmann::ordered_json j;
  j["x"] = data.column(spec.x).name;
  j["y"] = data.column(spec.y).name;
  auto cs = nlohmann::ordered_json::array();
  for (auto c : spec.cs) cs.push_back(data.column(c).name);
  j["cs"] = std::move(cs);
  j["g2"] = r.g2;
  j["chi2"] = r.chi2;
  j["dof"] = r.dof;
  j["dof_adjusted"] = r.dof_adjusted;
  j["log_p_g2"] = r.log_p_g2;
  j["log_p_chi2"] = r.log_p_chi2;
  j["p"] = std::exp(r.log_p_g2);
  j["empty_strata"] = r.empty_strata;
  j["method"] = std::string(to_string(r.method));
  j["degenerate"] = r.degenerate;
  return j;
}

std::string result_tsv_header() {
  return "x\ty\tcs\tg2\tchi2\tdof\tdof_adjusted\tlog_p_g2\tlog_p_chi2\tp\tempty_strata\tmethod";
}

std::string result_tsv_row(const Dataset& data, const TestSpec& spec, const TestResult& r) {
  std::ostringstream s;
  const auto cs = cs_names(data, spec);
  s << data.column(spec.x).name << '\t' << data.column(spec.y).name << '\t'
    << (cs.empty() ? "-" : cs) << '\t' << fixed("%.6f", r.g2) << '\t' << fixed("%.6f", r.chi2)
    << '\t' << r.dof << '\t' << r.dof_adjusted << '\t' << fixed("%.6f", r.log_p_g2) << '\t'
    << fixed("%.6f", r.log_p_chi2) << '\t' << fixed("%.6e", std::exp(r.log_p_g2)) << '\t'
    << r.empty_strata << '\t' << to_string(r.method);
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional independence tests for categorical data"};
  app.name(args.empty() ? "pllci" : args.front());
  app.require_subcommand(1);

  TestFlags test;
  auto* test_cmd = app.add_subcommand("test", "Run one conditional independence test");
  test.data.add(test_cmd);
  test_cmd->add_option("--x", test.x, "First variable (name or 0-based index)")->required();
  test_cmd->add_option("--y", test.y, "Second variable (name or 0-based index)")->required();
  test_cmd->add_option("--cs", test.cs, "Comma-separated conditioning variables");
  test_cmd->add_option("--method", test.method, "closed or ipf")
      ->check(CLI::IsMember({"closed", "closed_form", "ipf"}));
  test_cmd->add_flag("--adjust-dof", test.adjust_dof, "Use dof counted over occupied strata");
  test_cmd->add_option("--format", test.format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}));

  BatchFlags batch;
  auto* batch_cmd = app.add_subcommand("batch", "Screen many variable pairs");
  batch.data.add(batch_cmd);
  batch_cmd->add_option("--pairs", batch.pairs, "'all' or a file of 'x y [cs]' lines");
  batch_cmd->add_option("--cs", batch.cs, "Comma-separated conditioning variables");
  batch_cmd->add_option("--workers", batch.workers, "Worker threads (0 = all cores)");
  batch_cmd->add_option("--method", batch.method, "closed or ipf")
      ->check(CLI::IsMember({"closed", "closed_form", "ipf"}));
  batch_cmd->add_flag("--adjust-dof", batch.adjust_dof, "Use dof counted over occupied strata");
  batch_cmd->add_option("--format", batch.format, "jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--n", gen.n, "Sample size")->required();
  gen_cmd->add_option("--levels", gen.levels, "Level counts X,Y,Z1,..")->required();
  gen_cmd->add_option("--mode", gen.mode, "null or dependent")
      ->check(CLI::IsMember({"null", "null_ci", "dependent"}));
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output path ('-' for stdout)");
  gen_cmd->add_option("--delimiter", gen.delimiter, "Field delimiter (character or 'tab')");

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time repeated tests");
  bench_cmd->add_option("--test-counts", bench.test_counts, "Comma-separated T values");
  bench_cmd->add_option("--sample-sizes", bench.sample_sizes, "Comma-separated n values");
  bench_cmd->add_option("--scenarios", bench.scenarios,
                        "';'-separated conditioning level lists, e.g. '2;2,4;2,4,4'");
  bench_cmd->add_option("--repetitions", bench.repetitions, "Repetitions per cell");
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated subset of closed,ipf");
  bench_cmd->add_option("--batch-workers", bench.batch_workers,
                        "Also time batch screening with this many workers");
  bench_cmd->add_option("--seed", bench.seed, "Base seed for generated datasets");
  bench_cmd->add_option("--format", bench.format, "tsv or markdown")
      ->check(CLI::IsMember({"tsv", "markdown"}));
  bench_cmd->add_option("--out", bench.out, "Output path ('-' for stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("pllci");

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*test_cmd) return cmd_test(test, out);
    if (*batch_cmd) return cmd_batch(batch, out);
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SpecError& e) {
    err << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace pllci::cli
