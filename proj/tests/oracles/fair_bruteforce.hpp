#pragma once

// Exhaustive search for fair allocations on tiny display-ad instances:
// every vector of prefix lengths is tried, shares are recomputed from
// scratch, and the fair ones are returned. Independent of the library's
// fair-allocation code on purpose.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "spl/instance.hpp"

namespace oracle {

enum class Share { equal, proportional, top };

struct FairCandidate {
  std::vector<std::size_t> prefix;
  std::vector<std::vector<double>> x;  // x[i][j], dense
  double value = 0.0;
  double capped_value = 0.0;  // each advertiser keeps its best n(j) units only
};

/// Value of x when each advertiser keeps only its n(j) most valuable units
/// of impression mass.
inline double capped_value(const spl::DaInstance& da, const std::vector<std::vector<double>>& x) {
  double total = 0.0;
  for (std::size_t j = 0; j < da.advertisers.size(); ++j) {
    std::vector<std::pair<double, double>> held;  // (weight, mass)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i][j] > 0.0) held.push_back({*da.weight(i, j), x[i][j]});
    std::sort(held.begin(), held.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double room = static_cast<double>(da.advertisers[j].demand);
    for (const auto& [w, mass] : held) {
      const double take = std::min(room, mass);
      total += take * w;
      room -= take;
    }
  }
  return total;
}

inline std::vector<std::vector<std::size_t>> by_preference(const spl::DaInstance& da) {
  std::vector<std::vector<std::size_t>> pref(da.advertisers.size());
  for (std::size_t i = 0; i < da.impressions.size(); ++i)
    for (const auto& e : da.impressions[i].edges) pref[e.advertiser].push_back(i);
  for (std::size_t j = 0; j < pref.size(); ++j)
    std::stable_sort(pref[j].begin(), pref[j].end(), [&](std::size_t a, std::size_t b) {
      return *da.weight(a, j) > *da.weight(b, j);
    });
  return pref;
}

inline std::vector<FairCandidate> all_fair(const spl::DaInstance& da, Share rule) {
  const auto pref = by_preference(da);
  const std::size_t m = da.advertisers.size();
  const std::size_t n = da.impressions.size();
  std::vector<FairCandidate> out;
  std::vector<std::size_t> p(m, 0);
  while (true) {
    std::vector<std::vector<bool>> interested(n, std::vector<bool>(m, false));
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < p[j]; ++k) interested[pref[j][k]][j] = true;
    FairCandidate cand{p, std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0)), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      double count = 0.0, total = 0.0, top_w = -1.0;
      std::size_t top = m;
      for (std::size_t j = 0; j < m; ++j)
        if (interested[i][j]) {
          const double w = *da.weight(i, j);
          count += 1.0;
          total += w;
          if (w > top_w) {
            top_w = w;
            top = j;
          }
        }
      for (std::size_t j = 0; j < m; ++j) {
        if (!interested[i][j]) continue;
        const double w = *da.weight(i, j);
        if (rule == Share::equal) cand.x[i][j] = 1.0 / count;
        if (rule == Share::proportional) cand.x[i][j] = w / total;
        if (rule == Share::top) cand.x[i][j] = j == top ? 1.0 : 0.0;
        cand.value += cand.x[i][j] * w;
      }
    }
    bool fair = true;
    for (std::size_t j = 0; j < m && fair; ++j) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += cand.x[i][j];
      fair = p[j] == pref[j].size() || mass >= static_cast<double>(da.advertisers[j].demand) - 1e-9;
    }
    if (fair) {
      cand.capped_value = capped_value(da, cand.x);
      out.push_back(std::move(cand));
    }

    std::size_t j = 0;
    while (j < m && p[j] == pref[j].size()) p[j++] = 0;
    if (j == m) break;
    ++p[j];
  }
  return out;
}

/// The fair allocation whose prefixes are pointwise no larger than those of
/// every other fair allocation, if there is one.
inline const FairCandidate* pointwise_shortest(const std::vector<FairCandidate>& fair) {
  for (const auto& c : fair) {
    bool below_all = true;
    for (const auto& other : fair)
      for (std::size_t j = 0; j < c.prefix.size() && below_all; ++j) below_all = c.prefix[j] <= other.prefix[j];
    if (below_all) return &c;
  }
  return nullptr;
}

}  // namespace oracle
