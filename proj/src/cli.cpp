#include "spl/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "spl/bench.hpp"
#include "spl/fairness.hpp"
#include "spl/instance.hpp"
#include "spl/lp.hpp"
#include "spl/online.hpp"
#include "spl/ptas.hpp"
#include "spl/report_json.hpp"

namespace spl {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

// Instance given as a file or generated from flags, never both.
struct Source {
  std::string path;
  bool generate = false;
  SyntheticParams params;
};

void add_generator_flags(CLI::App* cmd, SyntheticParams& p) {
  cmd->add_option("--m", p.advertisers, "Number of advertisers")->capture_default_str();
  cmd->add_option("--n", p.impressions, "Number of impressions")->capture_default_str();
  cmd->add_option("--demand-min", p.demand_min, "Smallest demand n(j)")->capture_default_str();
  cmd->add_option("--demand-max", p.demand_max, "Largest demand n(j)")->capture_default_str();
  cmd->add_option("--density", p.density, "Probability that an impression is eligible for an advertiser")
      ->capture_default_str();
  cmd->add_option("--mu", p.mu, "Log-normal location of edge weights")->capture_default_str();
  cmd->add_option("--sigma", p.sigma, "Log-normal scale of edge weights")->capture_default_str();
  cmd->add_option("--spread", p.advertiser_spread, "Std. dev. of per-advertiser log-weight offsets")
      ->capture_default_str();
  cmd->add_option("--impression-spread", p.impression_spread, "Std. dev. of the per-impression common log-weight offset")
      ->capture_default_str();
  cmd->add_option("--density-spread", p.density_spread, "Std. dev. of per-advertiser log eligibility rates")
      ->capture_default_str();
}

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("instance", src.path, "Instance JSON file");
  cmd->add_flag("--generate", src.generate, "Use a synthetic instance built from the generator flags");
  add_generator_flags(cmd, src.params);
}

AnyInstance load_source(const Source& src, std::uint64_t seed) {
  if (!src.path.empty() && src.generate) throw std::invalid_argument("give an instance file or --generate, not both");
  if (src.generate) {
    SyntheticParams p = src.params;
    p.seed = seed;
    return generate_synthetic(p);
  }
  if (src.path.empty()) throw std::invalid_argument("no instance given (file argument or --generate)");
  return load_any(src.path);
}

const DaInstance& require_da(const AnyInstance& inst) {
  if (const auto* da = std::get_if<DaInstance>(&inst)) return *da;
  throw std::invalid_argument("this command needs a display-ad instance");
}

PlpInstance as_plp(const AnyInstance& inst) {
  if (const auto* da = std::get_if<DaInstance>(&inst)) return da_to_plp(*da);
  return std::get<PlpInstance>(inst);
}

void write_if(const std::string& path, const std::string& contents) {
  if (!path.empty()) write_file(path, contents);
}

TrainingPolicy parse_training_policy(const std::string& s) {
  if (s == "skip") return TrainingPolicy::skip;
  if (s == "online") return TrainingPolicy::online;
  throw std::invalid_argument("unknown training policy '" + s + "'");
}

AlphaSchedule parse_schedule(const std::string& s) {
  if (s == "linear") return AlphaSchedule::linear;
  if (s == "exponential") return AlphaSchedule::exponential;
  throw std::invalid_argument("unknown hybrid schedule '" + s + "'");
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("--eps must lie in (0, 1)");
}

struct Settings {
  std::uint64_t seed = 1;
  std::string out;
  Source source;
  // gen
  std::string kind = "synthetic";
  int T = 2;
  std::size_t draws = 0;
  // lp
  std::string lp_dump;
  // run / bench / diag
  std::string algo = "dualbase";
  std::string algos = "greedy,pd_avg,pd_exp,hybrid,dualbase,fair,lp_weight";
  double eps = 0.01;
  bool shrink = false;
  std::string training_policy;
  std::string hybrid_schedule = "linear";
  double half_life = 0.1;
  std::size_t trials = 10;
  std::size_t jobs = 1;
  bool timing = false;
  // fair / bench
  std::string policy = "equal";
  // lbdemo
  std::size_t reps = 50;
};

void add_seed(CLI::App* cmd, Settings& s) {
  cmd->add_option("--seed", s.seed, "Master seed")->envname("SPL_SEED")->capture_default_str();
}

void add_training_flags(CLI::App* cmd, Settings& s, const char* default_policy) {
  s.training_policy = default_policy;
  cmd->add_option("--eps", s.eps, "Training fraction of the arrival stream")->capture_default_str();
  cmd->add_flag("--shrink", s.shrink, "Shrink capacities by 1+3(eps+eps^2) for training and never exceed a capacity");
  cmd->add_option("--training-policy", s.training_policy, "Training prefix handling: skip | online")
      ->capture_default_str();
  cmd->add_option("--hybrid-schedule", s.hybrid_schedule, "Decay of the learned-price weight: linear | exponential")
      ->capture_default_str();
  cmd->add_option("--half-life", s.half_life, "Exponential schedule half-life as a fraction of the stream")
      ->capture_default_str();
}

int cmd_gen(const Settings& s) {
  std::string text;
  if (s.kind == "synthetic") {
    SyntheticParams p = s.source.params;
    p.seed = s.seed;
    text = to_json_string(generate_synthetic(p));
  } else if (s.kind == "lower-bound") {
    LowerBoundParams p;
    p.T = s.T;
    p.draws = s.draws;
    p.seed = s.seed;
    text = to_json_string(generate_lower_bound(p));
  } else {
    throw std::invalid_argument("unknown --kind '" + s.kind + "'");
  }
  if (s.out.empty())
    std::cout << text;
  else
    write_file(s.out, text);
  return 0;
}

int cmd_lp(const Settings& s) {
  const PlpInstance inst = as_plp(load_source(s.source, s.seed));
  const LpSolution sol = solve_primal(inst);
  const DualityReport check = verify_duality(inst, sol, 1e-7);
  std::cout << "objective " << num(sol.objective) << "\n";
  for (std::size_t j = 0; j < inst.resources.size(); ++j)
    std::cout << "beta " << inst.resources[j].id << " " << num(sol.beta[j]) << "\n";
  std::cout << "duality_gap " << num(check.gap) << "\n";
  write_if(s.lp_dump, to_lp_format(inst));
  write_if(s.out, lp_record(inst, sol, check));
  return 0;
}

int cmd_run(const Settings& s) {
  const AnyInstance any = load_source(s.source, s.seed);
  if (const auto* plp = std::get_if<PlpInstance>(&any)) {
    if (s.algo != "dualbase") throw std::invalid_argument("packing instances only support --algo dualbase");
    const PlpInstance inst = normalize(*plp);
    const auto order = random_order(inst.num_agents(), s.seed);
    TrainOptions topt;
    topt.shrink = s.shrink;
    const DualPrices prices = train(inst, order, s.eps, s.seed, topt);
    AllocateOptions aopt;
    aopt.training_policy = parse_training_policy(s.training_policy);
    aopt.enforce_capacity = s.shrink;
    aopt.seed = s.seed;
    const PlpAllocation alloc = allocate_remaining(prices, inst, order, s.eps, aopt);
    const SampleDiagnostics diag = diagnose_sample(inst, order, s.eps, prices, s.seed);
    std::cout << "algorithm DualBase\nvalue " << num(alloc.value) << "\nviolation " << num(alloc.violation) << "\n";
    write_if(s.out, dualbase_record(inst, prices, alloc, diag));
    return 0;
  }
  const DaInstance& da = std::get<DaInstance>(any);
  const auto order = random_order(da.num_impressions(), s.seed);
  DaAllocation alloc;
  const Algorithm a = parse_algorithm(s.algo);
  switch (a) {
    case Algorithm::greedy: alloc = run_online(da, order, DualRule::greedy); break;
    case Algorithm::pd_avg: alloc = run_online(da, order, DualRule::pd_avg); break;
    case Algorithm::pd_exp: alloc = run_online(da, order, DualRule::pd_exp); break;
    case Algorithm::hybrid: {
      check_eps(s.eps);
      HybridOptions h;
      h.schedule = parse_schedule(s.hybrid_schedule);
      h.half_life = s.half_life;
      h.train.shrink = s.shrink;
      alloc = run_hybrid(da, order, s.eps, s.seed, h);
      break;
    }
    case Algorithm::dualbase: {
      check_eps(s.eps);
      DualBaseOptions d;
      d.training_policy = parse_training_policy(s.training_policy);
      d.shrink = s.shrink;
      alloc = run_dualbase(da, order, s.eps, s.seed, d);
      break;
    }
    default: throw std::invalid_argument("run supports greedy, pd_avg, pd_exp, hybrid and dualbase");
  }
  std::cout << "algorithm " << to_string(a) << "\nvalue " << num(alloc.value) << "\nunassigned " << alloc.unassigned
            << "\nevictions " << alloc.evictions << "\n";
  write_if(s.out, online_record(da, alloc));
  return 0;
}

int cmd_fair(const Settings& s) {
  const AnyInstance any = load_source(s.source, s.seed);
  const DaInstance& da = require_da(any);
  const FairAllocation fair = compute_fair(da, parse_policy(s.policy));
  const FairnessCheck check = check_fair(da, fair);
  std::cout << "policy " << to_string(fair.policy) << "\nvalue " << num(total_value(fair.x, da)) << "\nfair "
            << (check.ok ? "yes" : "no (" + check.reason + ")") << "\n";
  write_if(s.out, fair_record(da, fair));
  return 0;
}

int cmd_bench(const Settings& s) {
  const AnyInstance any = load_source(s.source, s.seed);
  const DaInstance& da = require_da(any);
  if (s.trials < 1) throw std::invalid_argument("--trials must be >= 1");
  check_eps(s.eps);
  ExperimentConfig cfg;
  cfg.algorithms = parse_algorithm_list(s.algos);
  cfg.trials = s.trials;
  cfg.eps = s.eps;
  cfg.seed = s.seed;
  cfg.fairness_policy = parse_policy(s.policy);
  cfg.dualbase.training_policy = parse_training_policy(s.training_policy);
  cfg.dualbase.shrink = s.shrink;
  cfg.hybrid.schedule = parse_schedule(s.hybrid_schedule);
  cfg.hybrid.half_life = s.half_life;
  cfg.hybrid.train.shrink = s.shrink;
  cfg.jobs = s.jobs;
  cfg.timing = s.timing;
  cfg.on_trial = [&](std::size_t t) { std::cerr << "trial " << t + 1 << "/" << s.trials << " done\n"; };
  const Experiment exp = run_experiment(da, cfg);

  if (s.out.empty()) {
    std::cout << to_csv(exp.reports);
    return 0;
  }
  const fs::path dir(s.out);
  std::error_code ec;
  fs::create_directories(dir / "runs", ec);
  if (ec) throw IoError("cannot create " + (dir / "runs").string() + ": " + ec.message());
  emit_csv(exp.reports, dir / "bench.csv");
  write_file(dir / "summary.json", summary_record(exp));
  for (std::size_t k = 0; k < exp.reports.size(); ++k) {
    const auto& r = exp.reports[k];
    if (exp.allocations[k].assignment.empty()) continue;
    write_file(dir / "runs" / (r.algorithm + "-trial" + std::to_string(r.trial) + ".json"),
               online_record(da, exp.allocations[k]));
  }
  std::cout << "lp_value " << num(exp.lp_value) << "\n";
  for (const auto& sum : summarize(exp.reports))
    std::cout << sum.algorithm << " eff " << num(sum.eff_norm.mean) << " +- " << num(sum.eff_norm.std)
              << " fairness " << num(sum.fairness_norm.mean) << " +- " << num(sum.fairness_norm.std) << "\n";
  return 0;
}

int cmd_diag(const Settings& s) {
  const PlpInstance inst = normalize(as_plp(load_source(s.source, s.seed)));
  const auto order = random_order(inst.num_agents(), s.seed);
  TrainOptions topt;
  topt.shrink = s.shrink;
  const DualPrices prices = train(inst, order, s.eps, s.seed, topt);
  const SampleDiagnostics d = diagnose_sample(inst, order, s.eps, prices, s.seed);
  std::cout << "sample_size " << d.sample_size << "\nW " << num(d.W) << "\nW_S " << num(d.W_S) << "\nt " << num(d.t)
            << " threshold " << num(d.t_threshold) << (d.t_bad ? " BAD" : "") << "\n";
  for (std::size_t j = 0; j < d.r.size(); ++j)
    std::cout << "r " << inst.resources[j].id << " " << num(d.r[j]) << " threshold " << num(d.r_threshold[j])
              << (d.r_bad[j] ? " BAD" : "") << "\n";
  std::cout << "bad " << (d.any_bad() ? "yes" : "no") << "\n";
  write_if(s.out, diagnostics_record(inst, d));
  return 0;
}

int cmd_lbdemo(const Settings& s) {
  const LowerBoundDemo demo = lower_bound_demo(s.T, s.seed, s.reps);
  std::cout << "T " << demo.T << " capacity " << num(demo.capacity) << " reps " << demo.reps << "\n";
  for (const auto& row : demo.rows) {
    std::cout << "draws " << row.draws << " opt " << num(row.opt);
    for (std::size_t k = 0; k < row.ratio.size(); ++k) std::cout << " ratio[" << k << "] " << num(row.ratio[k]);
    std::cout << "\n";
  }
  std::cout << "accept_all_worst " << num(demo.accept_all_worst) << "\nbest_threshold_worst "
            << num(demo.best_threshold_worst) << "\n";
  write_if(s.out, lower_bound_record(demo));
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Online stochastic packing and display-ad allocation simulator", "spl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  Settings s;

  auto* gen = app.add_subcommand("gen", "Write a synthetic or lower-bound instance");
  gen->add_option("--kind", s.kind, "synthetic | lower-bound")->capture_default_str();
  add_generator_flags(gen, s.source.params);
  gen->add_option("--T", s.T, "Lower-bound value classes")->capture_default_str();
  gen->add_option("--draws", s.draws, "Lower-bound agent count")->capture_default_str();
  gen->add_option("-o,--out", s.out, "Output file (stdout when omitted)");
  add_seed(gen, s);

  auto* lp = app.add_subcommand("lp", "Solve the LP relaxation; print the optimum and resource prices");
  add_source(lp, s.source);
  add_seed(lp, s);
  lp->add_option("--lp-dump", s.lp_dump, "Also write the LP in CPLEX LP format");
  lp->add_option("-o,--out", s.out, "JSON record file");

  auto* run = app.add_subcommand("run", "Run one algorithm on one random arrival order");
  add_source(run, s.source);
  add_seed(run, s);
  run->add_option("--algo", s.algo, "greedy | pd_avg | pd_exp | hybrid | dualbase")->capture_default_str();
  add_training_flags(run, s, "skip");
  run->add_option("-o,--out", s.out, "JSON run record file");

  auto* fair = app.add_subcommand("fair", "Compute the shortest fair allocation under a sharing policy");
  add_source(fair, s.source);
  add_seed(fair, s);
  fair->add_option("--policy", s.policy, "equal | proportional | stable_matching")->capture_default_str();
  fair->add_option("-o,--out", s.out, "JSON record file");

  auto* bench = app.add_subcommand("bench", "Paired random-order experiment; CSV of normalized efficiency/fairness");
  add_source(bench, s.source);
  add_seed(bench, s);
  bench->add_option("--algos", s.algos, "Comma-separated algorithms")->capture_default_str();
  add_training_flags(bench, s, "online");
  bench->add_option("--trials", s.trials, "Number of random orders")->capture_default_str();
  bench->add_option("--policy", s.policy, "Sharing policy of the fair reference allocation")->capture_default_str();
  bench->add_option("--jobs", s.jobs, "Trials run in parallel")->capture_default_str();
  bench->add_flag("--timing", s.timing, "Record wall time per run (output is then not reproducible)");
  bench->add_option("-o,--out", s.out, "Output directory (CSV on stdout when omitted)")->envname("SPL_OUT");

  auto* diag = app.add_subcommand("diag", "Sample concentration diagnostics for one training sample");
  add_source(diag, s.source);
  add_seed(diag, s);
  diag->add_option("--eps", s.eps, "Training fraction")->capture_default_str();
  diag->add_flag("--shrink", s.shrink, "Train on shrunk capacities");
  diag->add_option("-o,--out", s.out, "JSON record file");

  auto* lbdemo = app.add_subcommand("lbdemo", "Fixed-threshold strategies against the hindsight optimum");
  lbdemo->add_option("--T", s.T, "Number of value classes")->capture_default_str();
  lbdemo->add_option("--reps", s.reps, "Sequences per draw count")->capture_default_str();
  add_seed(lbdemo, s);
  lbdemo->add_option("-o,--out", s.out, "JSON record file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen(s);
    if (*lp) return cmd_lp(s);
    if (*run) return cmd_run(s);
    if (*fair) return cmd_fair(s);
    if (*bench) return cmd_bench(s);
    if (*diag) return cmd_diag(s);
    if (*lbdemo) return cmd_lbdemo(s);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace spl
