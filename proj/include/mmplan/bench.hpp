#pragma once

// Benchmark driver: scenario x variant cross product, per-run metrics, and
// the CSV / trajectory / summary reports.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mmplan/scenario.hpp"

namespace mmplan {

struct Variant {
  std::string name;
  PlannerConfig planner;
  bool use_reach = true;
  bool use_smooth = true;
  bool use_collision = true;

  CostWeights apply(CostWeights w) const {
    if (!use_reach) w.lambda_r = 0.0;
    if (!use_smooth) w.lambda_s = 0.0;
    if (!use_collision) w.lambda_c = 0.0;
    return w;
  }
};

/// The bi-level default, the direct search, and the three single-term
/// removals.
inline std::vector<Variant> ablation_variants(const PlannerConfig& base = {}) {
  PlannerConfig direct = base;
  direct.search_mode = SearchMode::Direct;
  PlannerConfig bilevel = base;
  bilevel.search_mode = SearchMode::BiLevel;
  return {{"base", bilevel},
          {"direct", direct},
          {"no_reach", bilevel, false, true, true},
          {"no_smooth", bilevel, true, false, true},
          {"no_collision", bilevel, true, true, false}};
}

inline Variant variant_by_name(const std::string& name, const PlannerConfig& base = {}) {
  for (Variant& v : ablation_variants(base)) {
    if (v.name == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + name + "'");
}

struct RunMetrics {
  std::string scenario;
  std::string family;
  std::string variant;
  bool success = false;
  std::vector<bool> partial_successes;
  std::size_t segments = 0;
  std::size_t steps = 0;
  double latency_ms = 0.0;  // mean planning wall time per segment
  double reach = 0.0;
  double smooth = 0.0;
  double collide = 0.0;
  double total = 0.0;
  std::size_t objective_evals = 0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunRecord {
  RunMetrics metrics;
  std::vector<PlanResult> plans;
};

inline RunMetrics summarize_run(const Scenario& s, const std::string& variant,
                                const std::vector<PlanResult>& plans) {
  RunMetrics m;
  m.scenario = s.name;
  m.family = to_string(s.family);
  m.variant = variant;
  m.segments = plans.size();
  m.success = true;
  double wall = 0.0;
  for (const PlanResult& p : plans) {
    m.partial_successes.push_back(p.converged);
    m.success = m.success && p.converged;
    m.steps += p.trajectory.size();
    wall += p.wall_time_ms;
    m.reach += p.report.reach;
    m.smooth += p.report.smooth;
    m.collide += p.report.collide;
    m.total += p.report.total;
    m.objective_evals += p.objective_evals;
  }
  m.latency_ms = plans.empty() ? 0.0 : wall / static_cast<double>(plans.size());
  return m;
}

inline RunRecord run_cell(const Scenario& s, std::shared_ptr<const DistanceField> field,
                          const Variant& v) {
  const PlanningContext ctx = make_context(s, std::move(field), v.apply(s.weights));
  RunRecord r;
  r.plans = plan_episode(s.waypoints, s.start_state, ctx, v.planner);
  r.metrics = summarize_run(s, v.name, r.plans);
  return r;
}

struct SuiteOptions {
  std::size_t threads = 1;
  bool keep_plans = true;
};

/// Rows in (scenario, variant) order regardless of thread count. Each worker
/// builds one scenario's field and runs every variant on it.
inline std::vector<RunRecord> run_suite(const std::vector<Scenario>& scenarios,
                                        const std::vector<Variant>& variants,
                                        const SuiteOptions& opt = {}) {
  if (scenarios.empty() || variants.empty()) {
    throw std::invalid_argument("run_suite: need at least one scenario and one variant");
  }
  std::vector<RunRecord> rows(scenarios.size() * variants.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      const auto field = build_scenario_field(scenarios[i]);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        RunRecord r;
        try {
          r = run_cell(scenarios[i], field, variants[v]);
        } catch (const std::exception&) {
          r.metrics = summarize_run(scenarios[i], variants[v].name, {});
          r.metrics.success = false;
        }
        if (!opt.keep_plans) r.plans.clear();
        rows[i * variants.size() + v] = std::move(r);
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(opt.threads, scenarios.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

// ---------------------------------------------------------------- CSV

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "scenario", "family", "variant", "success", "partial_successes", "segments", "steps",
      "latency_ms", "reach", "smooth", "collide", "total", "objective_evals"};
  return cols;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_header() {
  std::string h;
  for (const auto& c : metrics_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

inline std::string csv_row(const RunMetrics& m) {
  std::string flags;
  for (bool b : m.partial_successes) flags += b ? '1' : '0';
  std::ostringstream o;
  o << m.scenario << ',' << m.family << ',' << m.variant << ',' << (m.success ? 1 : 0) << ','
    << flags << ',' << m.segments << ',' << m.steps << ',' << format_double(m.latency_ms) << ','
    << format_double(m.reach) << ',' << format_double(m.smooth) << ',' << format_double(m.collide)
    << ',' << format_double(m.total) << ',' << m.objective_evals;
  return o.str();
}

inline void write_metrics_csv(std::ostream& out, const std::vector<RunMetrics>& rows) {
  out << csv_header() << '\n';
  for (const auto& m : rows) out << csv_row(m) << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) f.push_back(cur);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

inline std::vector<RunMetrics> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) {
    throw std::runtime_error("metrics CSV: header does not match the schema");
  }
  std::vector<RunMetrics> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != metrics_columns().size()) {
      throw std::runtime_error("metrics CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(metrics_columns().size()) + " fields");
    }
    RunMetrics m;
    m.scenario = f[0];
    m.family = f[1];
    m.variant = f[2];
    m.success = f[3] == "1";
    for (char c : f[4]) m.partial_successes.push_back(c == '1');
    m.segments = std::stoull(f[5]);
    m.steps = std::stoull(f[6]);
    m.latency_ms = std::stod(f[7]);
    m.reach = std::stod(f[8]);
    m.smooth = std::stod(f[9]);
    m.collide = std::stod(f[10]);
    m.total = std::stod(f[11]);
    m.objective_evals = std::stoull(f[12]);
    rows.push_back(std::move(m));
  }
  return rows;
}

inline std::string trajectory_header(std::size_t dof) {
  std::string h = "segment,sample,base_x,base_y,base_yaw";
  for (std::size_t i = 0; i < dof; ++i) h += ",j" + std::to_string(i);
  h += ",gripper,reach,smooth,collide";
  return h;
}

/// One row per trajectory state with its per-sample cost terms.
inline void write_trajectory_csv(std::ostream& out, const std::vector<PlanResult>& plans,
                                 std::size_t dof) {
  out << trajectory_header(dof) << '\n';
  for (std::size_t s = 0; s < plans.size(); ++s) {
    const PlanResult& p = plans[s];
    for (std::size_t t = 0; t < p.trajectory.size(); ++t) {
      const WholeBodyState& st = p.trajectory.states[t];
      out << s << ',' << t << ',' << format_double(st.base.x()) << ',' << format_double(st.base.y())
          << ',' << format_double(st.base.yaw());
      for (Eigen::Index i = 0; i < st.joints.size(); ++i) out << ',' << format_double(st.joints[i]);
      out << ',' << format_double(st.gripper) << ',' << format_double(p.report.reach_terms[t]) << ','
          << format_double(p.report.smooth_terms[t]) << ','
          << format_double(p.report.collide_terms[t]) << '\n';
    }
  }
}

// ---------------------------------------------------------------- summary

struct Aggregate {
  std::size_t runs = 0;
  double success_rate = 0.0;
  double partial_rate = 0.0;  // fraction of converged segments
  double mean_latency_ms = 0.0;
  double mean_steps = 0.0;
  double mean_total = 0.0;
};

inline Aggregate aggregate(const std::vector<const RunMetrics*>& rows) {
  Aggregate a;
  std::size_t segs = 0, segs_ok = 0;
  for (const RunMetrics* m : rows) {
    ++a.runs;
    a.success_rate += m->success ? 1.0 : 0.0;
    a.mean_latency_ms += m->latency_ms;
    a.mean_steps += static_cast<double>(m->steps);
    a.mean_total += m->total;
    segs += m->partial_successes.size();
    for (bool b : m->partial_successes) segs_ok += b ? 1 : 0;
  }
  if (a.runs > 0) {
    const double n = static_cast<double>(a.runs);
    a.success_rate /= n;
    a.mean_latency_ms /= n;
    a.mean_steps /= n;
    a.mean_total /= n;
  }
  a.partial_rate = segs > 0 ? static_cast<double>(segs_ok) / static_cast<double>(segs) : 0.0;
  return a;
}

/// Aggregates keyed by variant, and by (variant, family), in first-seen order.
struct SummaryTable {
  std::vector<std::pair<std::string, Aggregate>> by_variant;
  std::vector<std::pair<std::string, Aggregate>> by_variant_family;  // "variant/family"
};

inline SummaryTable summarize(const std::vector<RunMetrics>& rows) {
  std::vector<std::string> variants, cells;
  std::map<std::string, std::vector<const RunMetrics*>> v_rows, c_rows;
  for (const auto& m : rows) {
    if (!v_rows.count(m.variant)) variants.push_back(m.variant);
    v_rows[m.variant].push_back(&m);
    const std::string key = m.variant + "/" + m.family;
    if (!c_rows.count(key)) cells.push_back(key);
    c_rows[key].push_back(&m);
  }
  std::sort(cells.begin(), cells.end(), [&](const std::string& a, const std::string& b) {
    const auto va = a.substr(0, a.find('/')), vb = b.substr(0, b.find('/'));
    const auto ia = std::find(variants.begin(), variants.end(), va) - variants.begin();
    const auto ib = std::find(variants.begin(), variants.end(), vb) - variants.begin();
    return ia != ib ? ia < ib : a < b;
  });
  SummaryTable t;
  for (const auto& v : variants) t.by_variant.emplace_back(v, aggregate(v_rows[v]));
  for (const auto& c : cells) t.by_variant_family.emplace_back(c, aggregate(c_rows[c]));
  return t;
}

inline void write_summary(std::ostream& out, const std::vector<RunMetrics>& rows) {
  const SummaryTable t = summarize(rows);
  const auto line = [&](const std::string& key, const Aggregate& a) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-28s %5zu %8.1f%% %9.1f%% %12.1f %9.1f %12.4g\n", key.c_str(),
                  a.runs, 100.0 * a.success_rate, 100.0 * a.partial_rate, a.mean_latency_ms,
                  a.mean_steps, a.mean_total);
    out << buf;
  };
  char head[200];
  std::snprintf(head, sizeof head, "%-28s %5s %9s %10s %12s %9s %12s\n", "group", "runs", "success",
                "partial", "latency_ms", "steps", "total");
  out << "== by variant\n" << head;
  for (const auto& [k, a] : t.by_variant) line(k, a);
  out << "\n== by variant and family\n" << head;
  for (const auto& [k, a] : t.by_variant_family) line(k, a);
}

/// Writes metrics.csv, summary.txt and trajectories/<scenario>__<variant>.csv
/// under `dir`.
inline void emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& dir,
                        std::size_t dof) {
  if (records.empty()) throw std::invalid_argument("emit_report: empty table");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "trajectories", ec);
  if (ec) throw std::runtime_error("emit_report: cannot create " + (dir / "trajectories").string() + ": " + ec.message());
  const auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("emit_report: cannot write " + p.string());
    return f;
  };
  std::vector<RunMetrics> rows;
  for (const auto& r : records) rows.push_back(r.metrics);
  {
    auto f = open(dir / "metrics.csv");
    write_metrics_csv(f, rows);
    if (!f) throw std::runtime_error("emit_report: failed writing " + (dir / "metrics.csv").string());
  }
  {
    auto f = open(dir / "summary.txt");
    write_summary(f, rows);
  }
  for (const auto& r : records) {
    if (r.plans.empty()) continue;
    const fs::path p = dir / "trajectories" / (r.metrics.scenario + "__" + r.metrics.variant + ".csv");
    auto f = open(p);
    write_trajectory_csv(f, r.plans, dof);
    if (!f) throw std::runtime_error("emit_report: failed writing " + p.string());
  }
}

}  // namespace mmplan
