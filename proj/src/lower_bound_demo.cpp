#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "spl/bench.hpp"
#include "spl/rng.hpp"

namespace spl {

LowerBoundDemo lower_bound_demo(int T, std::uint64_t seed, std::size_t reps) {
  if (T < 2) throw std::invalid_argument("T must be >= 2");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  LowerBoundDemo demo;
  demo.T = T;
  demo.capacity = static_cast<double>(lower_bound_capacity(T));
  demo.reps = reps;
  const auto cap = static_cast<std::size_t>(demo.capacity);
  std::vector<double> thresholds(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k) thresholds[static_cast<std::size_t>(k)] = lower_bound_type_value(T, k);

  const double base = 6.0 * T * std::log(static_cast<double>(T));
  for (int j = 0; j < T; ++j) {
    LowerBoundRow row;
    row.draws = static_cast<std::size_t>(std::llround(base * std::pow(static_cast<double>(T), 2.0 * j)));
    row.alg.assign(thresholds.size(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      LowerBoundParams params;
      params.T = T;
      params.draws = row.draws;
      params.seed = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(j)), r);
      const PlpInstance inst = generate_lower_bound(params);

      std::vector<double> values;
      values.reserve(inst.agents.size());
      for (const auto& agent : inst.agents) values.push_back(agent.options.front().weight);

      // A committed strategy takes every draw of type >= k while room is left.
      for (std::size_t k = 0; k < thresholds.size(); ++k) {
        std::size_t taken = 0;
        double v = 0.0;
        for (double w : values) {
          if (taken == cap) break;
          if (w >= thresholds[k]) {
            v += w;
            ++taken;
          }
        }
        row.alg[k] += v;
      }
      const auto top = std::min(cap, values.size());
      std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(top), values.end(),
                        std::greater<>());
      for (std::size_t k = 0; k < top; ++k) row.opt += values[k];
    }
    row.opt /= static_cast<double>(reps);
    for (auto& a : row.alg) a /= static_cast<double>(reps);
    row.ratio.resize(row.alg.size());
    for (std::size_t k = 0; k < row.alg.size(); ++k) row.ratio[k] = row.opt > 0.0 ? row.alg[k] / row.opt : 1.0;
    demo.rows.push_back(std::move(row));
  }

  demo.worst_ratio.assign(thresholds.size(), 1.0);
  for (const auto& row : demo.rows)
    for (std::size_t k = 0; k < row.ratio.size(); ++k) demo.worst_ratio[k] = std::min(demo.worst_ratio[k], row.ratio[k]);
  demo.accept_all_worst = demo.worst_ratio.front();
  demo.best_threshold_worst = *std::max_element(demo.worst_ratio.begin(), demo.worst_ratio.end());
  return demo;
}

}  // namespace spl
