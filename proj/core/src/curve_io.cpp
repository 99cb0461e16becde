#include "alr/curve_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "alr/error.hpp"
#include "csv.hpp"

namespace alr {

void write_curves_csv(std::span<const LearningCurve> curves, std::ostream& out) {
  out << kCurveCsvHeader << '\n';
  for (const auto& c : curves) {
    const std::string prefix = csv::escape(c.strategy) + ',' + csv::escape(c.solver) + ',';
    for (const auto& s : c.series) {
      for (std::size_t i = 0; i < c.ks.size(); ++i) {
        const Stat& v = s.values[i];
        out << prefix << csv::escape(s.task) << ',' << c.ks[i] << ',' << s.metric << ','
            << csv::format_double(v.mean) << ',' << csv::format_double(v.std) << ',' << v.n
            << '\n';
      }
    }
  }
}

void write_curves_csv(std::span<const LearningCurve> curves, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  write_curves_csv(curves, out);
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<LearningCurve> read_curves_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open curve file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCurveCsvHeader) {
    throw DataError(path.string() + ": unexpected header, expected " +
                    std::string(kCurveCsvHeader));
  }

  struct Row {
    std::size_t k;
    Stat stat;
  };
  struct Pending {
    std::string strategy, solver;
    std::vector<std::pair<std::string, std::string>> order;  // (metric, task)
    std::map<std::pair<std::string, std::string>, std::vector<Row>> rows;
  };
  std::vector<Pending> pending;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_record(line);
    auto fail = [&](const std::string& what) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 8) fail("expected 8 fields");
    const auto k = csv::parse_double(f[3]);
    const auto mean = csv::parse_double(f[5]);
    const auto sd = csv::parse_double(f[6]);
    const auto n = csv::parse_double(f[7]);
    if (!k || !mean || !sd || !n || *k < 0 || *n < 0) fail("non-numeric K/mean/std/n_runs");

    auto it = std::find_if(pending.begin(), pending.end(), [&](const Pending& p) {
      return p.strategy == f[0] && p.solver == f[1];
    });
    if (it == pending.end()) {
      pending.push_back({f[0], f[1], {}, {}});
      it = std::prev(pending.end());
    }
    const auto key = std::make_pair(f[4], f[2]);
    if (!it->rows.contains(key)) it->order.push_back(key);
    it->rows[key].push_back(
        {static_cast<std::size_t>(*k), Stat{*mean, *sd, static_cast<std::size_t>(*n)}});
  }

  std::vector<LearningCurve> curves;
  for (auto& p : pending) {
    LearningCurve c;
    c.strategy = p.strategy;
    c.solver = p.solver;
    for (const auto& key : p.order) {
      auto& rows = p.rows[key];
      std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.k < b.k; });
      std::vector<std::size_t> ks;
      CurveSeries s{key.first, key.second, {}};
      for (const auto& r : rows) {
        ks.push_back(r.k);
        s.values.push_back(r.stat);
        c.runs = std::max(c.runs, r.stat.n);
      }
      if (c.series.empty()) {
        c.ks = ks;
      } else if (ks != c.ks) {
        throw DataError(path.string() + ": mismatched K axes within curve " + c.strategy);
      }
      if (s.task != "all" &&
          std::find(c.task_names.begin(), c.task_names.end(), s.task) == c.task_names.end()) {
        c.task_names.push_back(s.task);
      }
      c.series.push_back(std::move(s));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::string csv_field(std::string_view text) { return csv::escape(text); }

std::string csv_number(double value) { return csv::format_double(value); }

std::string curves_to_json(std::span<const LearningCurve> curves) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& c : curves) {
    nlohmann::ordered_json j;
    j["strategy"] = c.strategy;
    j["solver"] = c.solver;
    j["runs"] = c.runs;
    j["tasks"] = c.task_names;
    j["K"] = c.ks;
    j["config"] = c.config_json.empty() ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json::parse(c.config_json);
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const auto& s : c.series) {
      nlohmann::ordered_json e;
      e["metric"] = s.metric;
      e["task"] = s.task;
      std::vector<double> mean, sd;
      std::vector<std::size_t> n;
      for (const auto& v : s.values) {
        mean.push_back(v.mean);
        sd.push_back(v.std);
        n.push_back(v.n);
      }
      e["mean"] = mean;
      e["std"] = sd;
      e["n_runs"] = n;
      series.push_back(std::move(e));
    }
    j["series"] = std::move(series);
    out.push_back(std::move(j));
  }
  return out.dump(2);
}

}  // namespace alr
