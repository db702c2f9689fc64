#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tradewinds/domain.hpp"
#include "tradewinds/geo.hpp"

namespace tradewinds::stats {

/// Product-moment correlation. Throws Error on length mismatch or fewer than
/// two samples, ZeroVariance when either vector is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// H = -sum p ln p over categories with positive counts (natural log).
/// Throws EmptyDistribution when no count is positive.
double shannon_entropy(const std::map<std::string, double>& counts);

/// k+1 strictly increasing breakpoints whose class widths form a geometric
/// progression. Data with min <= 0 is shifted by (eps - min) before the
/// ratio is taken and shifted back afterwards. Throws DegenerateRange when
/// max == min.
std::vector<double> geometric_intervals(std::span<const double> values, int k);

/// Index of the class containing v, in [0, breaks.size() - 2].
std::size_t interval_class(double v, std::span<const double> breaks);

/// Visit-distance distribution summary.
struct DecaySummary {
  double median_km = 0.0;           // visit-weighted median over all pairs
  double mean_of_medians_km = 0.0;  // mean of per-store weighted medians
  std::vector<std::pair<double, double>> pdf_bins;  // (bin center km, density)
  std::vector<std::pair<double, double>> ecdf;      // (km, cumulative prob)
  bool fit_ok = false;
  double loglog_slope = 0.0;
  double loglog_intercept = 0.0;
  std::pair<double, double> fit_range_km {0.0, 0.0};
  double total_visits = 0.0;
};

/// Weighted histogram / ECDF of neighborhood-to-store distances, each pair
/// weighted by its visit count, plus an OLS fit of ln(density) on
/// ln(distance) over bins with center >= fit_min_km and positive density.
/// Throws NoObservations when the visit matrix is empty.
DecaySummary decay_analysis(const Scenario& s, const geo::DistanceMatrix& d,
                            int bins = 30, double fit_min_km = 1.0);

struct RegressionReport {
  std::vector<std::string> variables;  // "intercept" first, then covariates
  std::map<std::string, double> coefficients;
  std::map<std::string, double> std_errors;
  std::map<std::string, double> t_stats;
  std::map<std::string, double> p_values;
  double r_squared = 0.0;
  std::size_t n_obs = 0;
};

/// OLS with an intercept via the normal equations; standard errors from
/// sigma^2 (X'X)^-1 and two-sided p-values from the t distribution with
/// n - k - 1 degrees of freedom. Throws InsufficientData when
/// n <= variables + 1, RankDeficient on collinear columns, ZeroVariance on a
/// constant response.
RegressionReport mlr_fit(const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& rows,
                         std::span<const double> response);

/// Design matrix for the visit-driver regression: one observation per
/// (neighborhood, store) pair with positive visits, response = pairwise
/// visit count. Pairs whose neighborhood lacks any covariate (age, income,
/// or race counts for the entropy term) are dropped (complete-case).
struct VisitDesign {
  std::vector<std::string> names;         // covariate order used in rows
  std::vector<std::vector<double>> rows;  // n x 6
  std::vector<double> response;
  std::vector<std::pair<std::size_t, std::size_t>> pair_index;  // (hood, store)
  std::size_t n_pairs_positive = 0;
  std::size_t n_dropped_missing = 0;
};

VisitDesign build_visit_design(const Scenario& s, const geo::DistanceMatrix& d);

/// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double incomplete_beta_reg(double a, double b, double x);

/// Student t CDF with dof degrees of freedom.
double student_t_cdf(double t, double dof);

/// R-style significance stars: *** below 0.001, ** below 0.01, * below 0.05,
/// '.' below 0.1, empty otherwise.
std::string significance_stars(double p);

}  // namespace tradewinds::stats
