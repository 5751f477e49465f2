#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include "chabauty/grassmannian.hpp"
#include "chabauty/metric.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace chabauty::testing {

/// Average ranks (ties share their mean rank).
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation: Pearson correlation of the ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

struct LineSequence {
  SubgroupDescriptor limit;
  std::vector<SubgroupDescriptor> terms;
};

/// A random one-parameter subgroup L = h V_(a,b,c) h^-1 and the terms
/// exp(t_k Y) L exp(-t_k Y) for a random unit direction Y and t_k decreasing
/// geometrically from 1 to 0.1.
inline LineSequence random_line_sequence(std::mt19937_64& rng, int terms = 8) {
  std::uniform_real_distribution<double> u(-1, 1), angle(-M_PI, M_PI);
  std::normal_distribution<double> g;
  const Element h{iwasawa(angle(rng), 0.3 * u(rng), 0.5 * u(rng)), Vec2<double>(u(rng), u(rng))};
  const auto base = conjugate_descriptor(SubgroupDescriptor::heis_line(u(rng), u(rng), u(rng)), h);
  Lie Y;
  for (int i = 0; i < 5; ++i) Y(i) = g(rng);
  Y /= Y.norm();
  LineSequence out{base, {}};
  for (int k = 0; k < terms; ++k) {
    const double t = std::pow(0.1, static_cast<double>(k) / (terms - 1));
    out.terms.push_back(conjugate_descriptor(base, exp<double>(t * Y)));
  }
  return out;
}

}  // namespace chabauty::testing
