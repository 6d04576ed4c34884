#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace yarnscope::stats {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    std::size_t n = 0;
};

/// Ordinary least squares y = slope * x + intercept; r2 = 1 - SS_res/SS_tot
/// (1 when the ys are constant and fit exactly).
LineFit linfit(std::span<const double> xs, std::span<const double> ys);

struct AnovaRow {
    double sum_of_squares = 0;
    int df = 0;
    double mean_square = 0;
};

struct AnovaTable {
    AnovaRow between;
    AnovaRow error;
    AnovaRow total;  ///< corrected total
    /// Empty when MS_error is zero and MS_between is not: an infinite F.
    std::optional<double> f;
    double p_value = 1;
    std::vector<std::size_t> n;
    std::vector<double> means;

    std::size_t k() const noexcept { return n.size(); }
    bool f_infinite() const noexcept { return !f.has_value(); }
};

using Groups = std::vector<std::vector<double>>;

AnovaTable one_way_anova(const Groups& groups);

struct PairwiseDiff {
    std::size_t i = 0;
    std::size_t j = 0;
    double diff = 0;  ///< mean_i - mean_j
    double se = 0;    ///< sqrt(MS_error * (1/n_i + 1/n_j))
    double p_value = 1;  ///< two-sided t test on df_error
};

/// Every ordered pair (i, j), i != j, in row-major order.
std::vector<PairwiseDiff> pairwise_mean_diff(std::span<const double> means, std::span<const std::size_t> ns,
                                             double ms_error, int df_error);
std::vector<PairwiseDiff> pairwise_mean_diff(const Groups& groups, double ms_error, int df_error);

/// Upper tail P(F > f) of the F(d1, d2) distribution.
double f_survival(double f, double d1, double d2);
/// Two-sided P(|T| > |t|) of Student's t with df degrees of freedom.
double t_two_sided(double t, double df);

}  // namespace yarnscope::stats
