#include "yarnscope/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "yarnscope/errors.hpp"

namespace yarnscope::stats {

LineFit linfit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ParameterError("linfit: xs and ys differ in length");
    if (xs.size() < 2) throw ParameterError("linfit: need at least two points");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0;
    double sxy = 0;
    double syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0) throw ParameterError("linfit: degenerate xs (all equal)");
    LineFit fit;
    fit.n = xs.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r2 = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

double f_survival(double f, double d1, double d2) {
    if (!(f > 0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(d1, d2), f));
}

double t_two_sided(double t, double df) {
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t_distribution<double> dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

AnovaTable one_way_anova(const Groups& groups) {
    if (groups.size() < 2) throw ParameterError("ANOVA needs at least two groups");
    AnovaTable t;
    double grand_sum = 0;
    std::size_t total_n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw ParameterError("ANOVA needs at least two observations per group");
        const double s = std::accumulate(g.begin(), g.end(), 0.0);
        t.n.push_back(g.size());
        t.means.push_back(s / static_cast<double>(g.size()));
        grand_sum += s;
        total_n += g.size();
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double dm = t.means[i] - grand_mean;
        t.between.sum_of_squares += static_cast<double>(t.n[i]) * dm * dm;
        for (double v : groups[i]) {
            t.error.sum_of_squares += (v - t.means[i]) * (v - t.means[i]);
            t.total.sum_of_squares += (v - grand_mean) * (v - grand_mean);
        }
    }
    t.between.df = static_cast<int>(groups.size()) - 1;
    t.error.df = static_cast<int>(total_n - groups.size());
    t.total.df = static_cast<int>(total_n) - 1;
    t.between.mean_square = t.between.sum_of_squares / t.between.df;
    t.error.mean_square = t.error.sum_of_squares / t.error.df;
    t.total.mean_square = t.total.sum_of_squares / t.total.df;

    if (t.between.sum_of_squares == 0) {
        t.f = 0.0;
        t.p_value = 1.0;
    } else if (t.error.sum_of_squares == 0) {
        t.f.reset();
        t.p_value = 0.0;
    } else {
        t.f = t.between.mean_square / t.error.mean_square;
        t.p_value = f_survival(*t.f, t.between.df, t.error.df);
    }
    return t;
}

std::vector<PairwiseDiff> pairwise_mean_diff(std::span<const double> means, std::span<const std::size_t> ns,
                                             double ms_error, int df_error) {
    if (means.size() != ns.size()) throw ParameterError("pairwise: means and counts differ in length");
    if (ms_error < 0) throw ParameterError("pairwise: MS_error must be >= 0");
    if (df_error < 1) throw ParameterError("pairwise: df_error must be >= 1");
    std::vector<PairwiseDiff> out;
    for (std::size_t i = 0; i < means.size(); ++i)
        for (std::size_t j = 0; j < means.size(); ++j) {
            if (i == j) continue;
            if (ns[i] == 0 || ns[j] == 0) throw ParameterError("pairwise: empty group");
            PairwiseDiff d;
            d.i = i;
            d.j = j;
            d.diff = means[i] - means[j];
            d.se = std::sqrt(ms_error * (1.0 / static_cast<double>(ns[i]) + 1.0 / static_cast<double>(ns[j])));
            if (d.se > 0) {
                d.p_value = t_two_sided(d.diff / d.se, df_error);
            } else {
                d.p_value = d.diff == 0 ? 1.0 : 0.0;
            }
            out.push_back(d);
        }
    return out;
}

std::vector<PairwiseDiff> pairwise_mean_diff(const Groups& groups, double ms_error, int df_error) {
    std::vector<double> means;
    std::vector<std::size_t> ns;
    for (const auto& g : groups) {
        if (g.empty()) throw ParameterError("pairwise: empty group");
        means.push_back(std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size()));
        ns.push_back(g.size());
    }
    return pairwise_mean_diff(means, ns, ms_error, df_error);
}

}  // namespace yarnscope::stats
