#include "pllci/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "pllci/citest.hpp"
#include "pllci/io.hpp"

namespace pllci {

std::string BenchScenario::id() const {
  if (cs_levels.empty()) return "z=none";
  std::string s = "z=";
  for (std::size_t i = 0; i < cs_levels.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(cs_levels[i]);
  }
  return s;
}

void BenchConfig::validate() const {
  if (test_counts.empty() || sample_sizes.empty() || scenarios.empty() || methods.empty()) {
    throw std::invalid_argument("bench configuration lists must be nonempty");
  }
  if (repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  for (auto t : test_counts) {
    if (t == 0) throw std::invalid_argument("test counts must be positive");
  }
  for (auto n : sample_sizes) {
    if (n == 0) throw std::invalid_argument("sample sizes must be positive");
  }
  if (levels_x < 2 || levels_y < 2) throw std::invalid_argument("X and Y need two levels");
  for (const auto& s : scenarios) {
    for (auto l : s.cs_levels) {
      if (l < 2) throw std::invalid_argument("conditioning variables need two levels");
    }
  }
}

namespace {

constexpr const char* kBatchLabel = "batch";

int method_rank(std::string_view m) {
  if (m == "closed_form") return 0;
  if (m == "ipf") return 1;
  return 2;
}

using Clock = std::chrono::steady_clock;

double time_tests(const Dataset& data, const std::vector<TestSpec>& specs, Method method,
                  std::size_t batch_workers) {
  volatile double sink = 0.0;
  const TestOptions options{method, false};
  const auto start = Clock::now();
  if (batch_workers > 0) {
    const auto results = batch_screen(data, specs, batch_workers, options);
    sink = sink + results.back().g2;
  } else {
    for (const auto& spec : specs) sink = sink + ci_test(data, spec, options).g2;
  }
  const auto stop = Clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  config.validate();

  struct Lane {
    std::string label;
    Method method;
    std::size_t workers;
    bool reported;
  };
  std::vector<Lane> lanes;
  const bool want_closed =
      std::find(config.methods.begin(), config.methods.end(), Method::closed_form) !=
      config.methods.end();
  lanes.push_back({"closed_form", Method::closed_form, 0, want_closed});
  if (std::find(config.methods.begin(), config.methods.end(), Method::ipf) !=
      config.methods.end()) {
    lanes.push_back({"ipf", Method::ipf, 0, true});
  }
  if (config.batch_workers > 0) {
    lanes.push_back({kBatchLabel, Method::closed_form, config.batch_workers, true});
  }

  std::vector<BenchRecord> records;
  for (const auto& scenario : config.scenarios) {
    TestSpec spec{0, 1, {}};
    GenConfig gen;
    gen.levels = {config.levels_x, config.levels_y};
    for (std::size_t i = 0; i < scenario.cs_levels.size(); ++i) {
      spec.cs.push_back(i + 2);
      gen.levels.push_back(scenario.cs_levels[i]);
    }
    const std::size_t max_tests =
        *std::max_element(config.test_counts.begin(), config.test_counts.end());
    const std::vector<TestSpec> specs(max_tests, spec);

    for (auto n : config.sample_sizes) {
      gen.n = n;
      // sums[t][lane]
      std::vector<std::vector<double>> sums(config.test_counts.size(),
                                            std::vector<double>(lanes.size(), 0.0));
      for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        gen.seed = config.seed + rep;
        const Dataset data = generate(gen);
        if (rep == 0) {
          const std::size_t warm =
              *std::min_element(config.test_counts.begin(), config.test_counts.end());
          const std::vector<TestSpec> warm_specs(warm, spec);
          for (const auto& lane : lanes) time_tests(data, warm_specs, lane.method, lane.workers);
        }
        for (std::size_t t = 0; t < config.test_counts.size(); ++t) {
          const std::vector<TestSpec> batch(specs.begin(),
                                            specs.begin() + config.test_counts[t]);
          // Rotate the lane order so no method always runs first on a cold cache.
          for (std::size_t i = 0; i < lanes.size(); ++i) {
            const std::size_t l = (i + rep) % lanes.size();
            sums[t][l] += time_tests(data, batch, lanes[l].method, lanes[l].workers);
          }
        }
      }
      for (std::size_t t = 0; t < config.test_counts.size(); ++t) {
        const double base = sums[t][0] / static_cast<double>(config.repetitions);
        for (std::size_t l = 0; l < lanes.size(); ++l) {
          if (!lanes[l].reported) continue;
          BenchRecord rec;
          rec.scenario = scenario.id();
          rec.n = n;
          rec.tests = config.test_counts[t];
          rec.method = lanes[l].label;
          rec.mean_seconds = sums[t][l] / static_cast<double>(config.repetitions);
          rec.normalized = l == 0 ? 1.0 : rec.mean_seconds / base;
          records.push_back(std::move(rec));
        }
      }
    }
  }
  return records;
}

namespace {

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void sort_records(std::vector<BenchRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tuple(a.scenario, a.n, a.tests, method_rank(a.method), a.method) <
           std::tuple(b.scenario, b.n, b.tests, method_rank(b.method), b.method);
  });
}

}  // namespace

std::string emit_report(std::vector<BenchRecord> records, ReportFormat format_kind) {
  if (records.empty()) throw std::invalid_argument("no benchmark records to report");
  sort_records(records);
  std::ostringstream out;

  if (format_kind == ReportFormat::tsv) {
    out << "scenario\tn\tT\tmethod\tmean_seconds\tnormalized\n";
    for (const auto& r : records) {
      out << r.scenario << '\t' << r.n << '\t' << r.tests << '\t' << r.method << '\t'
          << format("%.3e", r.mean_seconds) << '\t' << format("%.3f", r.normalized) << '\n';
    }
    return out.str();
  }

  std::vector<std::string> methods;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  std::stable_sort(methods.begin(), methods.end(),
                   [](const auto& a, const auto& b) { return method_rank(a) < method_rank(b); });

  out << "| scenario | n | T |";
  for (const auto& m : methods) out << ' ' << m << " (s) | " << m << " (norm) |";
  out << "\n|---|---:|---:|";
  for (std::size_t i = 0; i < methods.size(); ++i) out << "---:|---:|";
  out << '\n';

  std::map<std::string, const BenchRecord*> row;
  auto flush = [&](const BenchRecord& key) {
    out << "| " << key.scenario << " | " << key.n << " | " << key.tests << " |";
    for (const auto& m : methods) {
      auto it = row.find(m);
      if (it == row.end()) {
        out << " - | - |";
      } else {
        out << ' ' << format("%.3e", it->second->mean_seconds) << " | "
            << format("%.3f", it->second->normalized) << " |";
      }
    }
    out << '\n';
    row.clear();
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    row[r.method] = &r;
    const bool last = i + 1 == records.size();
    if (last || records[i + 1].scenario != r.scenario || records[i + 1].n != r.n ||
        records[i + 1].tests != r.tests) {
      flush(r);
    }
  }
  return out.str();
}

std::vector<BenchRecord> parse_report_tsv(std::string_view text) {
  std::vector<BenchRecord> records;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream fields(line);
    BenchRecord r;
    std::string n, t, mean, norm;
    if (!std::getline(fields, r.scenario, '\t') || !std::getline(fields, n, '\t') ||
        !std::getline(fields, t, '\t') || !std::getline(fields, r.method, '\t') ||
        !std::getline(fields, mean, '\t') || !std::getline(fields, norm, '\t')) {
      throw DataError("line " + std::to_string(line_no) + ": expected 6 tab-separated fields");
    }
    try {
      r.n = std::stoull(n);
      r.tests = std::stoull(t);
      r.mean_seconds = std::stod(mean);
      r.normalized = std::stod(norm);
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": malformed number");
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace pllci
