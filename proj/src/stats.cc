// Copyright 2026 The xling Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xling/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xling/error.h"

namespace xling::stats {
namespace {

constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("correlation: length mismatch (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) {
    throw ValidationError("correlation: need at least 3 observations");
  }
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Lower regularized gamma P(a, x) by its power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by continued fraction; valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

void ContingencyTable::validate() const {
  if (counts.size() < 2 || rows.size() != counts.size()) {
    throw ValidationError("contingency table: need >= 2 labelled rows");
  }
  if (cols.size() < 2) {
    throw ValidationError("contingency table: need >= 2 labelled columns");
  }
  std::int64_t total = 0;
  for (const auto& row : counts) {
    if (row.size() != cols.size()) {
      throw ValidationError("contingency table: ragged row");
    }
    for (std::int64_t c : row) {
      if (c < 0) throw ValidationError("contingency table: negative count");
      total += c;
    }
  }
  if (total <= 0) throw ValidationError("contingency table: empty");
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("correlation: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_r(rx, ry);
}

double regularized_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
               a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double regularized_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return regularized_beta(df / 2.0, 0.5, df / (df + t * t));
}

TestResult t_test_correlation(double r, int n) {
  if (n < 3) throw ValidationError("t test: need n >= 3");
  if (!(r >= -1.0 && r <= 1.0)) throw ValidationError("t test: r outside [-1, 1]");
  TestResult out;
  out.df = n - 2;
  if (std::fabs(r) == 1.0) {
    out.statistic = std::copysign(std::numeric_limits<double>::infinity(), r);
    out.p_value = 0.0;
    out.degenerate = true;
    return out;
  }
  out.statistic = r * std::sqrt(static_cast<double>(out.df) / (1.0 - r * r));
  out.p_value = std::clamp(student_t_two_sided_p(out.statistic, out.df), 0.0, 1.0);
  return out;
}

TestResult chi_square(const ContingencyTable& table) {
  table.validate();
  const std::size_t nr = table.counts.size();
  const std::size_t nc = table.cols.size();
  std::vector<double> row_tot(nr, 0.0), col_tot(nc, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      const auto c = static_cast<double>(table.counts[i][j]);
      row_tot[i] += c;
      col_tot[j] += c;
      grand += c;
    }
  }
  for (std::size_t i = 0; i < nr; ++i) {
    if (row_tot[i] == 0.0) {
      throw ValidationError("chi-square: row '" + table.rows[i] + "' is empty");
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    if (col_tot[j] == 0.0) {
      throw ValidationError("chi-square: column '" + table.cols[j] + "' is empty");
    }
  }
  TestResult out;
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      const double expected = row_tot[i] * col_tot[j] / grand;
      const double diff = static_cast<double>(table.counts[i][j]) - expected;
      out.statistic += diff * diff / expected;
    }
  }
  out.df = static_cast<int>((nr - 1) * (nc - 1));
  out.p_value = std::clamp(regularized_gamma_q(out.df / 2.0, out.statistic / 2.0), 0.0, 1.0);
  return out;
}

Histogram normalize(const Histogram& counts) {
  double total = 0.0;
  for (const auto& [k, v] : counts) {
    if (v < 0.0) throw ValidationError("histogram: negative mass");
    total += v;
  }
  if (total <= 0.0) throw ValidationError("histogram: no mass");
  Histogram out;
  for (const auto& [k, v] : counts) out[k] = v / total;
  return out;
}

double emd_1d(const Histogram& p, const Histogram& q) {
  auto mass = [](const Histogram& h) {
    double s = 0.0;
    for (const auto& [k, v] : h) s += v;
    return s;
  };
  if (std::fabs(mass(p) - 1.0) > 1e-6 || std::fabs(mass(q) - 1.0) > 1e-6) {
    throw ValidationError("emd_1d: histograms must be normalized");
  }
  // Walk the merged support in order; between consecutive support points
  // the CDF difference is constant, so each gap contributes |dF| * width.
  auto ip = p.begin();
  auto iq = q.begin();
  double cdf_p = 0.0, cdf_q = 0.0, total = 0.0;
  bool started = false;
  std::int64_t prev = 0;
  while (ip != p.end() || iq != q.end()) {
    std::int64_t k;
    if (iq == q.end() || (ip != p.end() && ip->first <= iq->first)) {
      k = ip->first;
    } else {
      k = iq->first;
    }
    if (started) {
      total += std::fabs(cdf_p - cdf_q) * static_cast<double>(k - prev);
    }
    if (ip != p.end() && ip->first == k) cdf_p += (ip++)->second;
    if (iq != q.end() && iq->first == k) cdf_q += (iq++)->second;
    prev = k;
    started = true;
  }
  return total;
}

}  // namespace xling::stats
