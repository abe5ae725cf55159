#include "spl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "spl/lp.hpp"
#include "spl/rng.hpp"

namespace spl {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::greedy: return "GREEDY";
    case Algorithm::pd_avg: return "PD_AVG";
    case Algorithm::pd_exp: return "PD_EXP";
    case Algorithm::hybrid: return "HYBRID";
    case Algorithm::dualbase: return "DualBase";
    case Algorithm::fair: return "FAIR";
    case Algorithm::lp_weight: return "LP_WEIGHT";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto a : {Algorithm::greedy, Algorithm::pd_avg, Algorithm::pd_exp, Algorithm::hybrid, Algorithm::dualbase,
                 Algorithm::fair, Algorithm::lp_weight}) {
    std::string canon(to_string(a));
    std::transform(canon.begin(), canon.end(), canon.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == canon) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::vector<Algorithm> parse_algorithm_list(std::string_view comma_separated) {
  std::vector<Algorithm> out;
  std::size_t start = 0;
  while (start <= comma_separated.size()) {
    const auto end = std::min(comma_separated.find(',', start), comma_separated.size());
    const auto item = comma_separated.substr(start, end - start);
    if (!item.empty()) {
      const auto a = parse_algorithm(item);
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("no algorithm given");
  return out;
}

std::vector<std::size_t> random_order(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return random_permutation(n, rng);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return derive_seed(master, trial); }

namespace {

FractionalX lp_fractional(const DaInstance& da, const LpSolution& sol) {
  FractionalX x(da.num_impressions());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t o = 0; o < sol.x[i].size(); ++o)
      if (sol.x[i][o] > 0.0) x[i].push_back({da.impressions[i].edges[o].advertiser, sol.x[i][o]});
  return x;
}

struct TrialOutput {
  std::vector<RunReport> reports;
  std::vector<DaAllocation> allocations;
};

}  // namespace

Experiment run_experiment(const DaInstance& da, const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.algorithms.empty()) throw std::invalid_argument("no algorithm selected");
  if (!(config.eps > 0.0 && config.eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");

  // Order-independent references, computed once.
  const LpSolution lp = solve_primal(da_to_plp(da));
  const FairAllocation fair = compute_fair(da, config.fairness_policy);
  const auto star_values = advertiser_values(fair.x, da);
  const FractionalX lp_x = lp_fractional(da, lp);
  const auto lp_values = advertiser_values(lp_x, da);

  Experiment result;
  result.lp_value = lp.objective;
  result.fair_value = std::accumulate(star_values.begin(), star_values.end(), 0.0);
  const double lp_value = lp.objective;
  auto eff = [&](double v) { return lp_value > 0.0 ? 100.0 * v / lp_value : 100.0; };

  auto run_trial = [&](std::size_t t) {
    TrialOutput out;
    const std::uint64_t seed = trial_seed(config.seed, t);
    const auto order = random_order(da.num_impressions(), seed);
    for (Algorithm a : config.algorithms) {
      RunReport rep;
      rep.algorithm = std::string(to_string(a));
      rep.trial = t;
      rep.seed = seed;
      DaAllocation alloc;
      const auto start = std::chrono::steady_clock::now();
      switch (a) {
        case Algorithm::greedy: alloc = run_online(da, order, DualRule::greedy); break;
        case Algorithm::pd_avg: alloc = run_online(da, order, DualRule::pd_avg); break;
        case Algorithm::pd_exp: alloc = run_online(da, order, DualRule::pd_exp); break;
        case Algorithm::hybrid: alloc = run_hybrid(da, order, config.eps, seed, config.hybrid); break;
        case Algorithm::dualbase: alloc = run_dualbase(da, order, config.eps, seed, config.dualbase); break;
        case Algorithm::fair:
        case Algorithm::lp_weight: break;
      }
      const auto stop = std::chrono::steady_clock::now();
      if (a == Algorithm::fair) {
        rep.advertiser_values = star_values;
        rep.value = result.fair_value;
        rep.fairness_raw = 0.0;
      } else if (a == Algorithm::lp_weight) {
        rep.advertiser_values = lp_values;
        rep.value = lp_value;
        rep.fairness_raw = fairness_metric(lp_values, star_values);
      } else {
        rep.advertiser_values = alloc.advertiser_value;
        rep.value = alloc.value;
        rep.fairness_raw = fairness_metric(alloc.advertiser_value, star_values);
      }
      rep.eff_norm = a == Algorithm::lp_weight ? 100.0 : eff(rep.value);
      if (config.timing) rep.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      out.reports.push_back(std::move(rep));
      out.allocations.push_back(std::move(alloc));
    }
    double worst = 0.0;
    for (const auto& r : out.reports) worst = std::max(worst, r.fairness_raw);
    for (auto& r : out.reports) r.fairness_norm = worst > 0.0 ? 100.0 * (r.fairness_raw / worst) : 0.0;
    return out;
  };

  std::vector<TrialOutput> trials(config.trials);
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, config.trials);
  if (jobs == 1) {
    for (std::size_t t = 0; t < config.trials; ++t) {
      trials[t] = run_trial(t);
      if (config.on_trial) config.on_trial(t);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < jobs; ++k)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < config.trials; t = next++) {
          try {
            trials[t] = run_trial(t);
          } catch (...) {
            std::lock_guard lock(log_mutex);
            if (!error) error = std::current_exception();
            return;
          }
          std::lock_guard lock(log_mutex);
          if (config.on_trial) config.on_trial(t);
        }
      });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  for (auto& t : trials) {
    for (auto& r : t.reports) result.reports.push_back(std::move(r));
    for (auto& a : t.allocations) result.allocations.push_back(std::move(a));
  }
  return result;
}

Stat mean_std(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<AlgorithmSummary> summarize(std::span<const RunReport> reports) {
  std::vector<std::string> names;
  for (const auto& r : reports)
    if (std::find(names.begin(), names.end(), r.algorithm) == names.end()) names.push_back(r.algorithm);
  std::vector<AlgorithmSummary> out;
  for (const auto& name : names) {
    std::vector<double> value, eff, fraw, fnorm;
    for (const auto& r : reports)
      if (r.algorithm == name) {
        value.push_back(r.value);
        eff.push_back(r.eff_norm);
        fraw.push_back(r.fairness_raw);
        fnorm.push_back(r.fairness_norm);
      }
    out.push_back({name, value.size(), mean_std(value), mean_std(eff), mean_std(fraw), mean_std(fnorm)});
  }
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, std::size_t column) {
  T v{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw ParseError("bad CSV field '" + std::string(field) + "'", line, column);
  return v;
}

}  // namespace

std::string to_csv(std::span<const RunReport> reports) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += r.algorithm;
    out += ',';
    out += std::to_string(r.trial);
    for (double v : {r.value, r.eff_norm, r.fairness_raw, r.fairness_norm}) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    append_number(out, r.wall_ms);
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const RunReport> reports, const std::filesystem::path& path) {
  write_file(path, to_csv(reports));
}

std::vector<RunReport> parse_csv(std::string_view text) {
  std::vector<RunReport> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line != kCsvHeader) throw ParseError("unexpected CSV header", line_no, 1);
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::vector<std::size_t> columns;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      columns.push_back(start + 1);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 8) throw ParseError("expected 8 CSV fields", line_no, 1);
    RunReport r;
    r.algorithm = std::string(fields[0]);
    r.trial = parse_field<std::size_t>(fields[1], line_no, columns[1]);
    r.value = parse_field<double>(fields[2], line_no, columns[2]);
    r.eff_norm = parse_field<double>(fields[3], line_no, columns[3]);
    r.fairness_raw = parse_field<double>(fields[4], line_no, columns[4]);
    r.fairness_norm = parse_field<double>(fields[5], line_no, columns[5]);
    r.seed = parse_field<std::uint64_t>(fields[6], line_no, columns[6]);
    r.wall_ms = parse_field<double>(fields[7], line_no, columns[7]);
    out.push_back(std::move(r));
  }
  if (header) throw ParseError("missing CSV header", 1, 1);
  return out;
}

std::vector<ConvergencePoint> ptas_convergence_study(const ConvergenceConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.eps_grid.empty()) throw std::invalid_argument("empty eps grid");
  std::vector<ConvergencePoint> curve(config.eps_grid.size());
  for (std::size_t e = 0; e < curve.size(); ++e) curve[e].eps = config.eps_grid[e];
  for (std::size_t t = 0; t < config.trials; ++t) {
    SyntheticParams params = config.params;
    params.seed = trial_seed(config.seed, t);
    const DaInstance da = generate_synthetic(params);
    const double opt = solve_primal(da_to_plp(da)).objective;
    const std::uint64_t order_seed = trial_seed(config.seed + 1, t);
    const auto order = random_order(da.num_impressions(), order_seed);
    for (auto& point : curve) {
      const double value = run_dualbase(da, order, point.eps, order_seed, config.dualbase).value;
      point.ratios.push_back(opt > 0.0 ? value / opt : 1.0);
    }
  }
  for (auto& point : curve) point.ratio = mean_std(point.ratios);
  return curve;
}

}  // namespace spl
