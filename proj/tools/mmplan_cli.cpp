// mmplan: generate, validate and plan scenarios; run benchmark suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmplan/mmplan.hpp"

namespace fs = std::filesystem;
using namespace mmplan;

namespace {

struct Common {
  std::uint64_t seed = 7;
  std::string out = "out";
  std::size_t evals = PlannerConfig{}.evals_per_block;
  std::string mode = "bilevel";
  std::size_t rounds = PlannerConfig{}.max_outer_rounds;
};

PlannerConfig planner_from(const Common& c) {
  PlannerConfig p;
  p.seed = c.seed;
  p.evals_per_block = c.evals;
  p.max_outer_rounds = c.rounds;
  if (c.mode == "bilevel") p.search_mode = SearchMode::BiLevel;
  else if (c.mode == "direct") p.search_mode = SearchMode::Direct;
  else throw CLI::ValidationError("--mode", "expected bilevel or direct");
  return p;
}

std::vector<Family> parse_families(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) out.push_back(family_from_string(n));
  if (out.empty()) out = all_families();
  return out;
}

std::vector<Scenario> generate_all(const std::vector<Family>& fams, std::size_t count,
                                   std::uint64_t seed) {
  std::vector<Scenario> out;
  for (Family f : fams) {
    auto s = generate_scenarios(f, count, seed);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

int run_and_report(const std::vector<Scenario>& scenarios, const std::vector<Variant>& variants,
                   std::size_t threads, const std::string& out) {
  SuiteOptions opt;
  opt.threads = threads;
  const auto records = run_suite(scenarios, variants, opt);
  emit_report(records, out, scenarios.front().chain.dof());
  std::vector<RunMetrics> rows;
  for (const auto& r : records) rows.push_back(r.metrics);
  write_summary(std::cout, rows);
  std::cout << "wrote " << (fs::path(out) / "metrics.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body trajectory optimization for a mobile manipulator"};
  app.require_subcommand(1);

  Common c;
  std::vector<std::string> families;
  std::size_t count = 20;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());

  auto* gen = app.add_subcommand("generate", "Write generated scenarios as JSON files");
  gen->add_option("--families", families, "Scenario families (default: all)");
  gen->add_option("--count", count, "Scenarios per family")->check(CLI::PositiveNumber);
  gen->add_option("--seed", c.seed, "Generator seed");
  gen->add_option("--out", c.out, "Output directory");

  std::vector<std::string> files;
  auto* val = app.add_subcommand("validate", "Check scenario certificates through the cost stack");
  val->add_option("scenarios", files, "Scenario files")->required()->check(CLI::ExistingFile);

  std::string scenario_file;
  auto* plan = app.add_subcommand("plan", "Plan one scenario and dump its trajectory");
  plan->add_option("scenario", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);
  plan->add_option("--seed", c.seed, "Planner seed");
  plan->add_option("--out", c.out, "Output directory");
  plan->add_option("--evals", c.evals, "Evaluation budget per annealing block");
  plan->add_option("--mode", c.mode, "bilevel or direct");
  plan->add_option("--rounds", c.rounds, "Maximum outer rounds per segment");

  std::vector<std::string> variant_names = {"base"};
  auto* suite = app.add_subcommand("suite", "Run generated families under planner variants");
  auto* ablate = app.add_subcommand("ablate", "Run the cost-term and search-policy ablations");
  for (auto* sc : {suite, ablate}) {
    sc->add_option("--families", families, "Scenario families (default: all)");
    sc->add_option("--count", count, "Scenarios per family")->check(CLI::PositiveNumber);
    sc->add_option("--seed", c.seed, "Generator and planner seed");
    sc->add_option("--out", c.out, "Output directory");
    sc->add_option("--evals", c.evals, "Evaluation budget per annealing block");
    sc->add_option("--rounds", c.rounds, "Maximum outer rounds per segment");
    sc->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  }
  suite->add_option("--variants", variant_names,
                    "Variants among base, direct, no_reach, no_smooth, no_collision")
      ->delimiter(',');
  suite->add_option("--mode", c.mode, "Search mode of the base variant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      fs::create_directories(c.out);
      for (const Scenario& s : generate_all(parse_families(families), count, c.seed)) {
        const fs::path p = fs::path(c.out) / (s.name + ".json");
        save_scenario(p.string(), s);
        std::cout << p.string() << '\n';
      }
      return 0;
    }
    if (*val) {
      int failures = 0;
      for (const auto& f : files) {
        const Scenario s = load_scenario(f);
        const PlanningContext ctx = make_context(s, build_scenario_field(s));
        const CertificateCheck chk = check_certificate(s, ctx);
        std::cout << (chk.ok() ? "OK   " : "FAIL ") << f;
        if (!chk.ok()) std::cout << "  (" << chk.detail << ")";
        std::cout << '\n';
        failures += chk.ok() ? 0 : 1;
      }
      return failures == 0 ? 0 : 1;
    }
    if (*plan) {
      const Scenario s = load_scenario(scenario_file);
      Variant v{"base", planner_from(c)};
      if (v.planner.search_mode == SearchMode::Direct) v.name = "direct";
      const RunRecord r = run_cell(s, build_scenario_field(s), v);
      fs::create_directories(c.out);
      const fs::path p = fs::path(c.out) / (s.name + "__" + v.name + ".csv");
      std::ofstream f(p);
      if (!f) throw std::runtime_error("cannot write " + p.string());
      write_trajectory_csv(f, r.plans, s.chain.dof());
      write_metrics_csv(std::cout, {r.metrics});
      std::cout << "wrote " << p.string() << '\n';
      return r.metrics.success ? 0 : 2;
    }
    const auto scenarios = generate_all(parse_families(families), count, c.seed);
    const PlannerConfig base = planner_from(c);
    std::vector<Variant> variants;
    if (*ablate) {
      variants = ablation_variants(base);
    } else {
      for (const auto& n : variant_names) {
        Variant v = variant_by_name(n, base);
        if (n == "base") v.planner.search_mode = base.search_mode;
        variants.push_back(v);
      }
    }
    return run_and_report(scenarios, variants, threads, c.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
