#include "spl/report_json.hpp"

#include <json.hpp>

namespace spl {

using nlohmann::ordered_json;

namespace {

std::string finish(const ordered_json& doc) { return doc.dump(1) + "\n"; }

ordered_json diagnostics_json(const PlpInstance& inst, const SampleDiagnostics& d) {
  ordered_json out;
  out["sample_size"] = d.sample_size;
  out["selected_agents"] = d.selected_agents;
  out["W"] = d.W;
  out["W_S"] = d.W_S;
  out["t"] = d.t;
  out["t_threshold"] = d.t_threshold;
  out["t_bad"] = d.t_bad;
  ordered_json res = ordered_json::array();
  for (std::size_t j = 0; j < d.r.size(); ++j) {
    ordered_json r;
    r["id"] = inst.resources[j].id;
    r["C"] = d.C[j];
    r["C_S"] = d.C_S[j];
    r["r"] = d.r[j];
    r["r_threshold"] = d.r_threshold[j];
    r["r_bad"] = static_cast<bool>(d.r_bad[j]);
    res.push_back(std::move(r));
  }
  out["resources"] = std::move(res);
  out["any_bad"] = d.any_bad();
  return out;
}

ordered_json stat_json(const Stat& s) {
  ordered_json out;
  out["mean"] = s.mean;
  out["std"] = s.std;
  return out;
}

}  // namespace

std::string lp_record(const PlpInstance& inst, const LpSolution& sol, const DualityReport& check) {
  ordered_json doc;
  doc["objective"] = sol.objective;
  doc["dual_objective"] = sol.dual_objective;
  doc["iterations"] = sol.iterations;
  ordered_json beta = ordered_json::object();
  for (std::size_t j = 0; j < inst.resources.size(); ++j) beta[inst.resources[j].id] = sol.beta[j];
  doc["beta"] = std::move(beta);
  ordered_json x = ordered_json::array();
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    for (std::size_t o = 0; o < sol.x[i].size(); ++o)
      if (sol.x[i][o] > 0.0) {
        ordered_json e;
        e["agent"] = inst.agents[i].id;
        e["option"] = inst.agents[i].options[o].id;
        e["x"] = sol.x[i][o];
        x.push_back(std::move(e));
      }
  doc["x"] = std::move(x);
  ordered_json dual = ordered_json::object();
  dual["gap"] = check.gap;
  dual["max_primal_violation"] = check.max_primal_violation;
  dual["max_dual_violation"] = check.max_dual_violation;
  dual["max_complementarity"] = check.max_complementarity;
  dual["ok"] = check.ok;
  doc["duality"] = std::move(dual);
  return finish(doc);
}

std::string dualbase_record(const PlpInstance& inst, const DualPrices& prices, const PlpAllocation& alloc,
                            const SampleDiagnostics& diag) {
  ordered_json doc;
  doc["algorithm"] = "DualBase";
  doc["epsilon"] = prices.epsilon;
  doc["sample_size"] = prices.sample_size;
  ordered_json beta = ordered_json::object();
  for (std::size_t j = 0; j < inst.resources.size(); ++j) beta[inst.resources[j].id] = prices.beta[j];
  doc["prices"] = std::move(beta);
  doc["value"] = alloc.value;
  doc["sample_value"] = alloc.sample_value;
  doc["selected"] = alloc.selected;
  doc["rejected_for_capacity"] = alloc.rejected_for_capacity;
  ordered_json util = ordered_json::object();
  for (std::size_t j = 0; j < inst.resources.size(); ++j)
    util[inst.resources[j].id] = alloc.usage[j] / inst.resources[j].capacity;
  doc["utilization"] = std::move(util);
  doc["violation"] = alloc.violation;
  doc["diagnostics"] = diagnostics_json(inst, diag);
  return finish(doc);
}

std::string online_record(const DaInstance& da, const DaAllocation& alloc) {
  ordered_json doc;
  doc["algorithm"] = alloc.algorithm;
  doc["value"] = alloc.value;
  ordered_json v = ordered_json::object();
  for (std::size_t j = 0; j < da.num_advertisers(); ++j) v[da.advertisers[j].id] = alloc.advertiser_value[j];
  doc["advertiser_value"] = std::move(v);
  doc["unassigned"] = alloc.unassigned;
  doc["evictions"] = alloc.evictions;
  ordered_json assign = ordered_json::object();
  for (std::size_t i = 0; i < alloc.assignment.size(); ++i)
    assign[da.impressions[i].id] =
        alloc.assignment[i] ? ordered_json(da.advertisers[*alloc.assignment[i]].id) : ordered_json(nullptr);
  doc["assignment"] = std::move(assign);
  ordered_json z = ordered_json::object();
  for (std::size_t i = 0; i < alloc.z.size(); ++i)
    if (alloc.z[i] != 0.0) z[da.impressions[i].id] = alloc.z[i];
  doc["z"] = std::move(z);
  return finish(doc);
}

std::string fair_record(const DaInstance& da, const FairAllocation& alloc) {
  ordered_json doc;
  doc["policy"] = std::string(to_string(alloc.policy));
  doc["value"] = total_value(alloc.x, da);
  ordered_json adv = ordered_json::array();
  const auto values = advertiser_values(alloc.x, da);
  for (std::size_t j = 0; j < da.num_advertisers(); ++j) {
    ordered_json a;
    a["id"] = da.advertisers[j].id;
    a["prefix"] = alloc.prefix[j];
    a["mass"] = alloc.mass[j];
    a["value"] = values[j];
    adv.push_back(std::move(a));
  }
  doc["advertisers"] = std::move(adv);
  ordered_json x = ordered_json::array();
  for (std::size_t i = 0; i < alloc.x.size(); ++i)
    for (const auto& s : alloc.x[i])
      if (s.fraction > 0.0) {
        ordered_json e;
        e["impression"] = da.impressions[i].id;
        e["advertiser"] = da.advertisers[s.advertiser].id;
        e["fraction"] = s.fraction;
        x.push_back(std::move(e));
      }
  doc["x"] = std::move(x);
  return finish(doc);
}

std::string diagnostics_record(const PlpInstance& inst, const SampleDiagnostics& diag) {
  return finish(diagnostics_json(inst, diag));
}

std::string lower_bound_record(const LowerBoundDemo& demo) {
  ordered_json doc;
  doc["T"] = demo.T;
  doc["capacity"] = demo.capacity;
  doc["reps"] = demo.reps;
  ordered_json rows = ordered_json::array();
  for (const auto& r : demo.rows) {
    ordered_json row;
    row["draws"] = r.draws;
    row["opt"] = r.opt;
    row["alg"] = r.alg;
    row["ratio"] = r.ratio;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  doc["worst_ratio"] = demo.worst_ratio;
  doc["accept_all_worst"] = demo.accept_all_worst;
  doc["best_threshold_worst"] = demo.best_threshold_worst;
  return finish(doc);
}

std::string convergence_record(const std::vector<ConvergencePoint>& curve) {
  ordered_json doc = ordered_json::array();
  for (const auto& p : curve) {
    ordered_json e;
    e["eps"] = p.eps;
    e["ratio"] = stat_json(p.ratio);
    e["ratios"] = p.ratios;
    doc.push_back(std::move(e));
  }
  return finish(doc);
}

std::string summary_record(const Experiment& experiment) {
  ordered_json doc;
  doc["lp_value"] = experiment.lp_value;
  doc["fair_value"] = experiment.fair_value;
  ordered_json algs = ordered_json::array();
  for (const auto& s : summarize(experiment.reports)) {
    ordered_json a;
    a["algorithm"] = s.algorithm;
    a["trials"] = s.rows;
    a["value"] = stat_json(s.value);
    a["eff_norm"] = stat_json(s.eff_norm);
    a["fairness_raw"] = stat_json(s.fairness_raw);
    a["fairness_norm"] = stat_json(s.fairness_norm);
    algs.push_back(std::move(a));
  }
  doc["algorithms"] = std::move(algs);
  return finish(doc);
}

}  // namespace spl
