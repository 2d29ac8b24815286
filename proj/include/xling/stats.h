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

// Small, dependency-free statistics kernel: correlations, their
// significance, Pearson's chi-square on contingency tables and the exact
// one-dimensional Earth Mover's Distance.

#ifndef XLING_STATS_H_
#define XLING_STATS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace xling::stats {

// Discrete distribution over integer support points. Normalized histograms
// sum to one; callers that build raw counts normalize before use.
using Histogram = std::map<std::int64_t, double>;

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  // Set when the statistic is at a boundary where the test is undefined
  // (|r| = 1, or a contingency table that collapsed below 2x2).
  bool degenerate = false;
};

struct ContingencyTable {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<std::int64_t>> counts;  // counts[row][col]

  // Throws ValidationError unless the table is at least 2x2, rectangular,
  // non-negative and has a positive grand total.
  void validate() const;
};

double pearson_r(std::span<const double> x, std::span<const double> y);

// Pearson correlation of mid-ranks.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Mid-ranks (1-based, ties share the average rank).
std::vector<double> average_ranks(std::span<const double> v);

// Two-sided Student t test of H0: rho = 0 for a sample correlation r over n
// observations. |r| == 1 yields p = 0 with `degenerate` set.
TestResult t_test_correlation(double r, int n);

TestResult chi_square(const ContingencyTable& table);

// Exact 1-D EMD with ground distance |i - j|, computed from cumulative
// sums over the merged support. Both inputs must be normalized to 1e-6.
double emd_1d(const Histogram& p, const Histogram& q);

// Turns raw counts into probabilities. Throws on an all-zero histogram.
Histogram normalize(const Histogram& counts);

// Special functions, exposed for testing.
double regularized_beta(double a, double b, double x);
double regularized_gamma_q(double a, double x);
double student_t_two_sided_p(double t, double df);

}  // namespace xling::stats

#endif  // XLING_STATS_H_
