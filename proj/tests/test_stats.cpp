#include <doctest.h>

#include <cmath>
#include <random>

#include "yarnscope/errors.hpp"
#include "yarnscope/stats.hpp"

using namespace yarnscope;
using namespace yarnscope::stats;

namespace {

// Normal equations solved directly: [n sx; sx sxx] [b; m] = [sy; sxy].
std::pair<double, double> normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
    double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

}  // namespace

TEST_CASE("least squares matches the normal equations") {
    std::mt19937 gen(1);
    std::normal_distribution<double> d(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x, y;
        for (int i = 0; i < 15; ++i) {
            x.push_back(d(gen) * 3);
            y.push_back(2 * x.back() + d(gen));
        }
        const auto fit = linfit(x, y);
        const auto [m, b] = normal_equations(x, y);
        CHECK(fit.slope == doctest::Approx(m).epsilon(1e-10));
        CHECK(fit.intercept == doctest::Approx(b).epsilon(1e-10));
        CHECK(fit.r2 > 0.5);
        CHECK(fit.r2 <= 1);
    }
    const std::vector<double> x{1, 2, 3}, y{5, 5, 5};
    CHECK(linfit(x, y).r2 == 1);
    CHECK_THROWS_AS(linfit(std::vector<double>{1, 1}, std::vector<double>{1, 2}), ParameterError);
    CHECK_THROWS_AS(linfit(std::vector<double>{1}, std::vector<double>{1}), ParameterError);
}

TEST_CASE("anova on a textbook example") {
    // Three groups with means 5, 9, 10; SSB = 2*(2^2+(-2)... computed by hand below.
    const Groups g{{4, 5, 6}, {8, 9, 10}, {9, 10, 11}};
    const auto t = one_way_anova(g);
    CHECK(t.means == std::vector<double>{5, 9, 10});
    CHECK(t.between.sum_of_squares == doctest::Approx(42));
    CHECK(t.error.sum_of_squares == doctest::Approx(6));
    CHECK(t.total.sum_of_squares == doctest::Approx(48));
    CHECK(t.between.df == 2);
    CHECK(t.error.df == 6);
    CHECK(*t.f == doctest::Approx(21));
    CHECK(t.p_value == doctest::Approx(0.00194).epsilon(0.01));
}

TEST_CASE("anova edge cases") {
    const auto inf = one_way_anova({{1, 1}, {2, 2}});
    CHECK(inf.f_infinite());
    CHECK(inf.p_value == 0);
    const auto zero = one_way_anova({{1, 2}, {1, 2}});
    CHECK(*zero.f == 0);
    CHECK(zero.p_value == 1);
    CHECK_THROWS_AS(one_way_anova({{1, 2}}), ParameterError);
    CHECK_THROWS_AS(one_way_anova({{1, 2}, {3}}), ParameterError);
}

TEST_CASE("distribution tails") {
    CHECK(f_survival(1, 1, 1) == doctest::Approx(0.5));
    CHECK(f_survival(0, 3, 7) == 1);
    CHECK(t_two_sided(0, 5) == doctest::Approx(1));
    CHECK(t_two_sided(2.570582, 5) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(f_survival(4.256495, 2, 9) == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("pairwise differences from summary values") {
    const std::vector<double> means{38.01, 41.91, 23.86};
    const std::vector<std::size_t> ns{5, 5, 5};
    const auto d = pairwise_mean_diff(means, ns, 22.106, 12);
    REQUIRE(d.size() == 6);
    CHECK(d[0].i == 0);
    CHECK(d[0].j == 1);
    CHECK(d[0].diff == doctest::Approx(-3.9));
    CHECK(d[0].se == doctest::Approx(std::sqrt(22.106 * 0.4)));
    CHECK(d[0].p_value > 0.2);
    CHECK(d[3].diff == doctest::Approx(18.05));
    CHECK(d[3].p_value < 0.001);
    CHECK_THROWS_AS(pairwise_mean_diff(means, ns, -1, 12), ParameterError);
    CHECK_THROWS_AS(pairwise_mean_diff(means, ns, 1, 0), ParameterError);
}
