#include "spl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace spl {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Variable ids, in Bland order:
//   [0, S)            option variables x_io, agent-major
//   [S, S + n)        agent slacks (one per convexity row)
//   [S + n, S + n + m) resource slacks
class GubSimplex {
 public:
  GubSimplex(const PlpInstance& inst, const LpOptions& options)
      : inst_(inst),
        opt_(options),
        m_(inst.num_resources()),
        n_(inst.num_agents()) {
    first_var_.resize(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) first_var_[i + 1] = first_var_[i] + inst.agents[i].options.size();
    num_struct_ = first_var_[n_];
    agent_of_.resize(num_struct_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t v = first_var_[i]; v < first_var_[i + 1]; ++v) agent_of_[v] = i;
    total_ = num_struct_ + n_ + m_;

    capacity_.resize(static_cast<Eigen::Index>(m_));
    for (std::size_t j = 0; j < m_; ++j) capacity_[static_cast<Eigen::Index>(j)] = inst.resources[j].capacity;
    const double wmax = inst.max_weight();
    cost_tol_ = 1e-9 * std::max(1.0, wmax);

    basic_.assign(total_, 0);
    pos_.assign(total_, kNone);
    key_.resize(n_);
    nonkey_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      key_[i] = agent_slack(i);
      basic_[key_[i]] = 1;
    }
    working_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      working_[j] = resource_slack(j);
      basic_[working_[j]] = 1;
      pos_[working_[j]] = j;
    }
    key_usage_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    window_ = std::min<std::size_t>(n_, 128);
  }

  LpSolution run() {
    const std::size_t limit =
        opt_.max_iterations > 0 ? opt_.max_iterations : 50 * (total_ + 10) + 1000;
    std::size_t degenerate_run = 0;
    std::size_t iter = 0;
    for (;; ++iter) {
      if (iter >= limit) throw std::runtime_error("simplex iteration limit exceeded");
      if (iter % 256 == 255) recompute_key_usage();
      refactor();
      const bool bland = degenerate_run >= opt_.degenerate_limit;
      const std::size_t entering = bland ? price_bland() : price_partial();
      if (entering == kNone) break;
      const double step = pivot(entering, bland);
      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
    }
    return extract(iter);
  }

 private:
  std::size_t agent_slack(std::size_t i) const { return num_struct_ + i; }
  std::size_t resource_slack(std::size_t j) const { return num_struct_ + n_ + j; }
  bool is_resource_slack(std::size_t v) const { return v >= num_struct_ + n_; }
  bool is_agent_slack(std::size_t v) const { return v >= num_struct_ && v < num_struct_ + n_; }
  std::size_t set_of(std::size_t v) const {
    if (v < num_struct_) return agent_of_[v];
    if (is_agent_slack(v)) return v - num_struct_;
    return kNone;
  }
  const Option* option_of(std::size_t v) const {
    if (v >= num_struct_) return nullptr;
    const std::size_t i = agent_of_[v];
    return &inst_.agents[i].options[v - first_var_[i]];
  }
  double weight(std::size_t v) const {
    const Option* o = option_of(v);
    return o ? o->weight : 0.0;
  }
  // out += coef * A_v
  template <class Vec>
  void add_column(std::size_t v, double coef, Vec&& out) const {
    if (is_resource_slack(v)) {
      out[static_cast<Eigen::Index>(v - num_struct_ - n_)] += coef;
      return;
    }
    if (const Option* o = option_of(v))
      for (const auto& u : o->usage) out[static_cast<Eigen::Index>(u.resource)] += coef * u.amount;
  }
  // Column of v after eliminating its set's key.
  Eigen::VectorXd transformed_column(std::size_t v) const {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    add_column(v, 1.0, col);
    const std::size_t r = set_of(v);
    if (r != kNone) add_column(key_[r], -1.0, col);
    return col;
  }
  double gain(std::size_t v) const {
    const Option* o = option_of(v);
    if (!o) return 0.0;
    double g = o->weight;
    for (const auto& u : o->usage) g -= pi_[static_cast<Eigen::Index>(u.resource)] * u.amount;
    return g;
  }
  double key_value(std::size_t r) const {
    double val = 1.0;
    for (std::size_t u : nonkey_[r]) val -= xw_[static_cast<Eigen::Index>(pos_[u])];
    return val;
  }

  void recompute_key_usage() {
    key_usage_.setZero();
    for (std::size_t i = 0; i < n_; ++i) add_column(key_[i], 1.0, key_usage_);
  }

  void refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    if (m == 0) {
      xw_.resize(0);
      pi_.resize(0);
      return;
    }
    basis_.setZero(m, m);
    cw_.resize(m);
    for (std::size_t k = 0; k < m_; ++k) {
      const std::size_t u = working_[k];
      auto col = basis_.col(static_cast<Eigen::Index>(k));
      add_column(u, 1.0, col);
      if (const std::size_t r = set_of(u); r != kNone) add_column(key_[r], -1.0, col);
      const std::size_t r = set_of(u);
      cw_[static_cast<Eigen::Index>(k)] = r == kNone ? 0.0 : weight(u) - weight(key_[r]);
    }
    lu_.compute(basis_);
    xw_ = lu_.solve(capacity_ - key_usage_);
    pi_ = lu_.transpose().solve(cw_);
  }

  // Best reduced cost of a nonbasic member of set i, or kNone.
  std::size_t best_in_set(std::size_t i, double& best) const {
    const double gk = gain(key_[i]);
    std::size_t pick = kNone;
    for (std::size_t v = first_var_[i]; v < first_var_[i + 1]; ++v) {
      if (basic_[v]) continue;
      const double d = gain(v) - gk;
      if (d > best) {
        best = d;
        pick = v;
      }
    }
    const std::size_t s = agent_slack(i);
    if (!basic_[s] && -gk > best) {
      best = -gk;
      pick = s;
    }
    return pick;
  }

  std::size_t price_partial() {
    double best = cost_tol_;
    std::size_t pick = kNone;
    for (std::size_t j = 0; j < m_; ++j) {
      const std::size_t t = resource_slack(j);
      if (!basic_[t] && -pi_[static_cast<Eigen::Index>(j)] > best) {
        best = -pi_[static_cast<Eigen::Index>(j)];
        pick = t;
      }
    }
    for (std::size_t scanned = 0; scanned < n_; ++scanned) {
      const std::size_t i = cursor_;
      cursor_ = cursor_ + 1 == n_ ? 0 : cursor_ + 1;
      if (const std::size_t v = best_in_set(i, best); v != kNone) pick = v;
      if (pick != kNone && scanned + 1 >= window_) break;
    }
    return pick;
  }

  std::size_t price_bland() const {
    for (std::size_t i = 0; i < n_; ++i) {
      const double gk = gain(key_[i]);
      for (std::size_t v = first_var_[i]; v < first_var_[i + 1]; ++v)
        if (!basic_[v] && gain(v) - gk > cost_tol_) return v;
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (!basic_[agent_slack(i)] && -gain(key_[i]) > cost_tol_) return agent_slack(i);
    for (std::size_t j = 0; j < m_; ++j)
      if (!basic_[resource_slack(j)] && -pi_[static_cast<Eigen::Index>(j)] > cost_tol_)
        return resource_slack(j);
    return kNone;
  }

  // Performs the ratio test and basis change; returns the step length.
  double pivot(std::size_t entering, bool bland) {
    const std::size_t in_set = set_of(entering);
    Eigen::VectorXd delta;
    if (m_ > 0) delta = lu_.solve(transformed_column(entering));
    const double scale = m_ > 0 ? delta.cwiseAbs().maxCoeff() : 0.0;
    const double piv_tol = std::max(1e-14, 1e-9 * scale);
    const double key_tol = 1e-9 * std::max(1.0, scale);

    double theta = std::numeric_limits<double>::infinity();
    double pivot_mag = 0.0;
    std::size_t leave_var = kNone;
    std::size_t leave_pos = kNone;  // working position, or kNone for a key
    std::size_t leave_set = kNone;
    auto consider = [&](double ratio, double mag, std::size_t var, std::size_t pos, std::size_t set) {
      const double tie = 1e-12 * (1.0 + std::abs(theta));
      bool take = false;
      if (leave_var == kNone || ratio < theta - tie) {
        take = true;
      } else if (ratio <= theta + tie) {
        take = bland ? var < leave_var : mag > pivot_mag;
      }
      if (take) {
        theta = ratio;
        pivot_mag = mag;
        leave_var = var;
        leave_pos = pos;
        leave_set = set;
      }
    };

    std::vector<std::size_t> sets;
    for (std::size_t k = 0; k < m_; ++k) {
      const double dk = delta[static_cast<Eigen::Index>(k)];
      if (dk > piv_tol) consider(std::max(0.0, xw_[static_cast<Eigen::Index>(k)]) / dk, dk, working_[k], k, kNone);
      const std::size_t r = set_of(working_[k]);
      if (r != kNone && std::abs(dk) > 0.0) sets.push_back(r);
    }
    if (in_set != kNone) sets.push_back(in_set);
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    for (std::size_t r : sets) {
      double slope = r == in_set ? -1.0 : 0.0;
      for (std::size_t u : nonkey_[r]) slope += delta[static_cast<Eigen::Index>(pos_[u])];
      if (slope < -key_tol) consider(std::max(0.0, key_value(r)) / -slope, -slope, key_[r], kNone, r);
    }
    if (leave_var == kNone) throw std::runtime_error("simplex: unbounded direction in a packing LP");

    auto enter_working = [&](std::size_t k) {
      working_[k] = entering;
      pos_[entering] = k;
      basic_[entering] = 1;
      if (in_set != kNone) nonkey_[in_set].push_back(entering);
    };
    auto erase_nonkey = [&](std::size_t r, std::size_t u) {
      auto& list = nonkey_[r];
      list.erase(std::find(list.begin(), list.end(), u));
    };

    if (leave_pos != kNone) {
      basic_[leave_var] = 0;
      pos_[leave_var] = kNone;
      if (const std::size_t r = set_of(leave_var); r != kNone) erase_nonkey(r, leave_var);
      enter_working(leave_pos);
    } else {
      const std::size_t r = leave_set;
      basic_[leave_var] = 0;
      add_column(leave_var, -1.0, key_usage_);
      if (in_set == r) {
        key_[r] = entering;
        basic_[entering] = 1;
      } else {
        const std::size_t promoted = nonkey_[r].front();
        erase_nonkey(r, promoted);
        const std::size_t k = pos_[promoted];
        pos_[promoted] = kNone;
        key_[r] = promoted;
        enter_working(k);
      }
      add_column(key_[r], 1.0, key_usage_);
    }
    return theta;
  }

  LpSolution extract(std::size_t iterations) {
    recompute_key_usage();
    refactor();
    LpSolution sol;
    sol.iterations = iterations;
    sol.x.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sol.x[i].assign(inst_.agents[i].options.size(), 0.0);
    auto assign = [&](std::size_t v, double value) {
      if (v < num_struct_) sol.x[agent_of_[v]][v - first_var_[agent_of_[v]]] = std::max(0.0, value);
    };
    for (std::size_t k = 0; k < m_; ++k) assign(working_[k], xw_[static_cast<Eigen::Index>(k)]);
    for (std::size_t i = 0; i < n_; ++i) assign(key_[i], key_value(i));
    sol.beta.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) sol.beta[j] = std::max(0.0, pi_[static_cast<Eigen::Index>(j)]);
    sol.z.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sol.z[i] = std::max(0.0, gain(key_[i]));

    double primal = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t o = 0; o < sol.x[i].size(); ++o) primal += inst_.agents[i].options[o].weight * sol.x[i][o];
    double dual = 0.0;
    for (std::size_t j = 0; j < m_; ++j) dual += inst_.resources[j].capacity * sol.beta[j];
    for (double zi : sol.z) dual += zi;
    sol.objective = primal;
    sol.dual_objective = dual;
    return sol;
  }

  const PlpInstance& inst_;
  LpOptions opt_;
  std::size_t m_;
  std::size_t n_;
  std::size_t num_struct_ = 0;
  std::size_t total_ = 0;
  std::vector<std::size_t> first_var_;
  std::vector<std::size_t> agent_of_;
  Eigen::VectorXd capacity_;
  double cost_tol_ = 1e-9;

  std::vector<char> basic_;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> key_;
  std::vector<std::vector<std::size_t>> nonkey_;
  std::vector<std::size_t> working_;
  Eigen::VectorXd key_usage_;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd cw_;
  Eigen::VectorXd xw_;
  Eigen::VectorXd pi_;

  std::size_t cursor_ = 0;
  std::size_t window_ = 64;
};

}  // namespace

LpSolution solve_primal(const PlpInstance& inst, const LpOptions& options) {
  return GubSimplex(inst, options).run();
}

PlpInstance reduced_instance(const PlpInstance& sample, double eps) {
  PlpInstance reduced = sample;
  for (auto& r : reduced.resources) r.capacity *= eps;
  return reduced;
}

DualPrices solve_reduced_dual(const PlpInstance& sample, double eps, const LpOptions& options) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  DualPrices prices;
  prices.epsilon = eps;
  prices.sample_size = sample.num_agents();
  if (sample.agents.empty()) {
    prices.beta.assign(sample.num_resources(), 0.0);
    return prices;
  }
  prices.beta = solve_primal(reduced_instance(sample, eps), options).beta;
  return prices;
}

DualityReport verify_duality(const PlpInstance& inst, const LpSolution& sol, double tol) {
  if (sol.x.size() != inst.num_agents() || sol.z.size() != inst.num_agents() ||
      sol.beta.size() != inst.num_resources())
    throw std::invalid_argument("solution shape does not match the instance");
  for (std::size_t i = 0; i < inst.num_agents(); ++i)
    if (sol.x[i].size() != inst.agents[i].options.size())
      throw std::invalid_argument("solution shape does not match agent '" + inst.agents[i].id + "'");

  DualityReport rep;
  std::vector<double> load(inst.num_resources(), 0.0);
  for (std::size_t i = 0; i < inst.num_agents(); ++i) {
    double row = 0.0;
    for (std::size_t o = 0; o < sol.x[i].size(); ++o) {
      const auto& opt = inst.agents[i].options[o];
      const double x = sol.x[i][o];
      rep.max_primal_violation = std::max(rep.max_primal_violation, -x);
      row += x;
      rep.primal_objective += opt.weight * x;
      double priced = sol.z[i];
      for (const auto& u : opt.usage) {
        load[u.resource] += u.amount * x;
        priced += sol.beta[u.resource] * u.amount;
      }
      const double reduced = opt.weight - priced;
      rep.max_dual_violation = std::max(rep.max_dual_violation, reduced / std::max(1.0, std::abs(opt.weight)));
      rep.max_complementarity = std::max(rep.max_complementarity, std::abs(x * reduced));
    }
    rep.max_primal_violation = std::max(rep.max_primal_violation, row - 1.0);
    rep.max_dual_violation = std::max(rep.max_dual_violation, -sol.z[i]);
    rep.max_complementarity = std::max(rep.max_complementarity, std::abs(sol.z[i] * (1.0 - row)));
    rep.dual_objective += sol.z[i];
  }
  for (std::size_t j = 0; j < inst.num_resources(); ++j) {
    const double cap = inst.resources[j].capacity;
    rep.max_primal_violation = std::max(rep.max_primal_violation, (load[j] - cap) / std::max(1.0, cap));
    rep.max_dual_violation = std::max(rep.max_dual_violation, -sol.beta[j]);
    rep.max_complementarity = std::max(rep.max_complementarity, std::abs(sol.beta[j] * (cap - load[j])));
    rep.dual_objective += cap * sol.beta[j];
  }
  const double scale = 1.0 + std::abs(rep.primal_objective);
  rep.gap = std::abs(rep.primal_objective - rep.dual_objective) / scale;
  rep.ok = rep.gap <= tol && rep.max_primal_violation <= tol && rep.max_dual_violation <= tol &&
           rep.max_complementarity <= tol * scale;
  return rep;
}

std::string to_lp_format(const PlpInstance& inst) {
  // Variables: x_<i>_<o>; rows: agent_<i>, res_<j>. Indices are 0-based
  // positions in the instance; the original ids are listed in comments.
  std::ostringstream out;
  out.precision(17);
  out << "\\ packing LP: " << inst.num_agents() << " agents, " << inst.num_resources() << " resources\n";
  for (std::size_t j = 0; j < inst.num_resources(); ++j) out << "\\ res_" << j << " = " << inst.resources[j].id << "\n";
  out << "Maximize\n obj:";
  bool any = false;
  for (std::size_t i = 0; i < inst.num_agents(); ++i)
    for (std::size_t o = 0; o < inst.agents[i].options.size(); ++o) {
      out << " + " << inst.agents[i].options[o].weight << " x_" << i << "_" << o;
      any = true;
    }
  if (!any) out << " 0";
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < inst.num_agents(); ++i) {
    if (inst.agents[i].options.empty()) continue;
    out << " agent_" << i << ":";
    for (std::size_t o = 0; o < inst.agents[i].options.size(); ++o) out << " + x_" << i << "_" << o;
    out << " <= 1\n";
  }
  std::vector<std::ostringstream> rows(inst.num_resources());
  std::vector<bool> used(inst.num_resources(), false);
  for (auto& r : rows) r.precision(17);
  for (std::size_t i = 0; i < inst.num_agents(); ++i)
    for (std::size_t o = 0; o < inst.agents[i].options.size(); ++o)
      for (const auto& u : inst.agents[i].options[o].usage) {
        rows[u.resource] << " + " << u.amount << " x_" << i << "_" << o;
        used[u.resource] = true;
      }
  for (std::size_t j = 0; j < inst.num_resources(); ++j) {
    if (!used[j]) continue;
    out << " res_" << j << ":" << rows[j].str() << " <= " << inst.resources[j].capacity << "\n";
  }
  out << "Bounds\n";
  for (std::size_t i = 0; i < inst.num_agents(); ++i)
    for (std::size_t o = 0; o < inst.agents[i].options.size(); ++o) out << " x_" << i << "_" << o << " >= 0\n";
  out << "End\n";
  return out.str();
}

}  // namespace spl
