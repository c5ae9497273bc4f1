#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "pllci/bench.hpp"
#include "pllci/io.hpp"

using namespace pllci;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run pllci_run(std::vector<std::string> args) {
  args.insert(args.begin(), "pllci");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Writes a generated dataset to a temporary file that is removed on scope exit.
struct DataFile {
  fs::path path;
  DataFile(const std::string& name, const GenConfig& config)
      : path(fs::temp_directory_path() / ("pllci_test_cli_" + name)) {
    write_delimited(generate(config), path);
  }
  DataFile(const std::string& name, const std::string& text)
      : path(fs::temp_directory_path() / ("pllci_test_cli_" + name)) {
    std::ofstream(path) << text;
  }
  ~DataFile() { fs::remove(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("test reports a JSON result") {
  DataFile f("test.csv", GenConfig{3000, {3, 4, 2, 4, 4}, Dependence::null_ci, 5});
  const auto r = pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--cs", "Z1,Z2,Z3"});
  REQUIRE(r.code == cli::kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["dof"] == 192);
  CHECK(j["cs"] == nlohmann::json::array({"Z1", "Z2", "Z3"}));
  CHECK(j["method"] == "closed_form");
  CHECK(j["log_p_g2"].get<double>() <= 0.0);
  CHECK(j["p"].get<double>() == doctest::Approx(std::exp(j["log_p_g2"].get<double>())));

  const auto by_index = pllci_run({"test", "--data", f.str(), "--x", "0", "--y", "1", "--cs", "2,3,4"});
  CHECK(by_index.out == r.out);
}

TEST_CASE("closed and ipf agree through the command line") {
  DataFile f("methods.csv", GenConfig{2000, {3, 4, 2}, Dependence::null_ci, 6});
  const auto a = pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--cs", "Z1"});
  const auto b = pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--cs", "Z1",
                            "--method", "ipf"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
  CHECK(jb["method"] == "ipf");
  CHECK(jb["g2"].get<double>() == doctest::Approx(ja["g2"].get<double>()).epsilon(1e-8));
}

TEST_CASE("TSV and JSON carry the same values") {
  DataFile f("tsv.csv", GenConfig{1000, {2, 3, 3}, Dependence::dependent, 8});
  const auto j = nlohmann::json::parse(
      pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--cs", "Z1"}).out);
  const auto t = lines(pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--cs",
                                  "Z1", "--format", "tsv"})
                           .out);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == cli::result_tsv_header());
  std::istringstream row(t[1]);
  std::string x, y, cs;
  double g2, chi2;
  unsigned dof;
  row >> x >> y >> cs >> g2 >> chi2 >> dof;
  CHECK(x == "X");
  CHECK(cs == "Z1");
  CHECK(g2 == doctest::Approx(j["g2"].get<double>()).epsilon(1e-6));
  CHECK(chi2 == doctest::Approx(j["chi2"].get<double>()).epsilon(1e-6));
  CHECK(dof == j["dof"]);
}

TEST_CASE("exit codes") {
  DataFile f("codes.csv", GenConfig{200, {2, 2, 2}, Dependence::null_ci, 9});
  CHECK(pllci_run({}).code == cli::kUsage);
  CHECK(pllci_run({"frobnicate"}).code == cli::kUsage);
  CHECK(pllci_run({"test", "--data", f.str(), "--x", "X"}).code == cli::kUsage);
  CHECK(pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--method", "glm"}).code ==
        cli::kUsage);
  CHECK(pllci_run({"test", "--data", "/nonexistent/file.csv", "--x", "X", "--y", "Y"}).code ==
        cli::kDataError);
  CHECK(pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "W"}).code == cli::kSpecError);
  const auto overlap = pllci_run({"test", "--data", f.str(), "--x", "X", "--y", "Y", "--cs", "X"});
  CHECK(overlap.code == cli::kSpecError);
  CHECK(overlap.err.find("overlapping") != std::string::npos);
  CHECK(pllci_run({"--help"}).code == cli::kOk);
}

TEST_CASE("ragged data is a data error naming the line") {
  DataFile f("ragged.csv", std::string("a,b\n1,2\n3\n"));
  const auto r = pllci_run({"test", "--data", f.str(), "--x", "a", "--y", "b"});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("batch screens all pairs identically for any worker count") {
  DataFile f("batch.csv", GenConfig{1500, {3, 2, 4, 2, 3}, Dependence::dependent, 10});
  const auto one = pllci_run({"batch", "--data", f.str(), "--workers", "1"});
  const auto many = pllci_run({"batch", "--data", f.str(), "--workers", "8"});
  REQUIRE(one.code == 0);
  CHECK(lines(one.out).size() == 10);
  CHECK(one.out == many.out);
  const auto tsv = pllci_run({"batch", "--data", f.str(), "--cs", "Z3", "--format", "tsv"});
  CHECK(lines(tsv.out).size() == 1 + 6);
}

TEST_CASE("a pairs file matches standalone tests") {
  DataFile f("pairs_data.csv", GenConfig{1200, {3, 3, 2, 2}, Dependence::null_ci, 11});
  DataFile pairs("pairs.txt", std::string("# x y cs\nX Y Z1,Z2\nX Z1\n\nY Z2 X\n"));
  const auto r = pllci_run({"batch", "--data", f.str(), "--pairs", pairs.str()});
  REQUIRE(r.code == 0);
  const auto got = lines(r.out);
  REQUIRE(got.size() == 3);
  const std::vector<std::vector<std::string>> singles{
      {"--x", "X", "--y", "Y", "--cs", "Z1,Z2"}, {"--x", "X", "--y", "Z1"},
      {"--x", "Y", "--y", "Z2", "--cs", "X"}};
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::string> args{"test", "--data", f.str()};
    args.insert(args.end(), singles[i].begin(), singles[i].end());
    const auto single = nlohmann::json::parse(pllci_run(args).out);
    CHECK(nlohmann::json::parse(got[i]) == single);
  }
}

TEST_CASE("gen writes a readable dataset") {
  const auto path = fs::temp_directory_path() / "pllci_test_cli_gen.csv";
  const auto r = pllci_run({"gen", "--n", "300", "--levels", "3,4,2", "--seed", "4", "--out",
                            path.string()});
  REQUIRE(r.code == 0);
  const auto d = read_delimited(path);
  fs::remove(path);
  CHECK(d.n_rows() == 300);
  CHECK(d.same_observations(generate({300, {3, 4, 2}, Dependence::null_ci, 4})));
  const auto stdout_run = pllci_run({"gen", "--n", "5", "--levels", "2,2"});
  CHECK(lines(stdout_run.out).size() == 6);
  CHECK(pllci_run({"gen", "--n", "5", "--levels", "2,1"}).code == cli::kUsage);
  CHECK(pllci_run({"gen", "--n", "5", "--levels", "2,2", "--mode", "weak"}).code == cli::kUsage);
}

TEST_CASE("bench runs a small grid") {
  const auto r = pllci_run({"bench", "--test-counts", "10", "--sample-sizes", "500",
                            "--scenarios", "none;2", "--repetitions", "2", "--methods", "closed"});
  REQUIRE(r.code == 0);
  const auto records = parse_report_tsv(r.out);
  CHECK(records.size() == 2);
  for (const auto& rec : records) CHECK(rec.normalized == 1.0);
  CHECK(pllci_run({"bench", "--test-counts", "0"}).code == cli::kUsage);
  const auto md = pllci_run({"bench", "--test-counts", "5", "--sample-sizes", "300",
                             "--scenarios", "2", "--repetitions", "1", "--format", "markdown"});
  CHECK(md.out.find("ipf (norm)") != std::string::npos);
}
