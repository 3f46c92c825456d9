#include <doctest.h>

#include <numeric>

#include "ehaloha/stats.hpp"
#include "oracles.hpp"

using namespace ehaloha;
using doctest::Approx;

TEST_CASE("pmfs agree with direct formulas")
{
    for (Count j = 0; j < 12; ++j)
    {
        CHECK(stats::binomial_pmf(j, 11, 0.37)
              == Approx(ehaloha::testing::binom_pmf(j, 11, 0.37)).epsilon(1e-12));
    }
    auto const law = ehaloha::testing::poisson_law(2.0, 30);
    for (Count j = 0; j < 29; ++j)
    {
        CHECK(stats::poisson_pmf(j, 2.0) == Approx(law[static_cast<std::size_t>(j)]).epsilon(1e-12));
    }
    CHECK(stats::poisson_pmf(0, 0.0) == 1.0);
    CHECK(stats::poisson_pmf(-1, 2.0) == 0.0);
    CHECK(stats::binomial_pmf(3, 3, 1.0) == 1.0);
    CHECK(stats::binomial_pmf(0, 3, 0.0) == 1.0);
}

TEST_CASE("poisson bins sum to one with a tail bin")
{
    auto const bins = stats::poisson_bins(2.0, 6);
    CHECK(std::accumulate(bins.begin(), bins.end(), 0.0) == Approx(1.0).epsilon(1e-14));
    // P(X >= 5) for Poisson(2)
    CHECK(bins.back() == Approx(0.052653017343711).epsilon(1e-10));
    CHECK(stats::poisson_bins(3.0, 1) == std::vector<double>{1.0});
    CHECK_THROWS(stats::poisson_bins(1.0, 0));
}

TEST_CASE("poisson support covers all but the tail")
{
    std::size_t const k = stats::poisson_support(2.0, 1e-9);
    auto const bins = stats::poisson_bins(2.0, k);
    CHECK(bins.back() < 1e-9);
    CHECK(stats::poisson_bins(2.0, k - 1).back() >= 1e-9);
}

TEST_CASE("histogram clamps into the last bin")
{
    std::vector<Count> const v{0, 1, 1, 5, 9, -2};
    CHECK(stats::histogram(v, 4) == std::vector<Count>{2, 2, 0, 2});
}

TEST_CASE("chi-square survival function at textbook quantiles")
{
    CHECK(stats::chi_square_sf(3.841458820694124, 1) == Approx(0.05).epsilon(1e-9));
    CHECK(stats::chi_square_sf(18.307038053275146, 10) == Approx(0.05).epsilon(1e-9));
    CHECK(stats::chi_square_sf(6.634896601021214, 1) == Approx(0.01).epsilon(1e-9));
    CHECK(stats::chi_square_sf(0.0, 3) == 1.0);
    CHECK(stats::chi_square_sf(5.0, 0) == 1.0);
}

TEST_CASE("goodness of fit on a hand-computed table")
{
    std::vector<Count> const obs{18, 22, 30, 30};
    std::vector<double> const probs{0.25, 0.25, 0.25, 0.25};
    auto const g = stats::chi_square_gof(obs, probs);
    // (49 + 9 + 25 + 25) / 25
    CHECK(g.statistic == Approx(4.32));
    CHECK(g.dof == 3);
    CHECK(g.pooled_bins == 4);
    CHECK(g.samples == 100);
    CHECK(g.p_value == Approx(stats::chi_square_sf(4.32, 3)));
}

TEST_CASE("goodness of fit pools sparse bins")
{
    std::vector<Count> const obs{50, 45, 3, 2};
    std::vector<double> const probs{0.5, 0.45, 0.03, 0.02};
    auto const g = stats::chi_square_gof(obs, probs);
    CHECK(g.pooled_bins == 3);
    CHECK(g.statistic == Approx(0.0));
    CHECK_THROWS(stats::chi_square_gof(obs, std::vector<double>{1.0}));
}

TEST_CASE("homogeneity of identical rows")
{
    std::vector<std::vector<Count>> const rows{{10, 20, 30}, {20, 40, 60}};
    auto const g = stats::chi_square_homogeneity(rows);
    CHECK(g.statistic == Approx(0.0));
    CHECK(g.dof == 2);
    CHECK(g.p_value == Approx(1.0));
}

TEST_CASE("homogeneity on a 2x2 table")
{
    std::vector<std::vector<Count>> const rows{{30, 10}, {10, 30}};
    // expected 20 everywhere: 4 * 100 / 20
    auto const g = stats::chi_square_homogeneity(rows);
    CHECK(g.statistic == Approx(20.0));
    CHECK(g.dof == 1);
}

TEST_CASE("total variation")
{
    std::vector<Count> const obs{5, 5};
    CHECK(stats::tv_distance(obs, std::vector<double>{0.5, 0.5}) == Approx(0.0));
    CHECK(stats::tv_distance(obs, std::vector<double>{1.0, 0.0}) == Approx(0.5));
}

TEST_CASE("linear fit recovers an exact line and its t statistic")
{
    std::vector<double> const x{0, 1, 2, 3, 4};
    std::vector<double> const y{1, 3, 5, 7, 9};
    auto const f = stats::linear_fit(x, y);
    CHECK(f.slope == Approx(2.0));
    CHECK(f.intercept == Approx(1.0));
    CHECK(f.r_squared == Approx(1.0));

    std::vector<double> const y2{1, 2, 1.5, 3, 2.5};
    auto const g = stats::linear_fit(x, y2);
    // slope 0.4, residual ss 0.9, sxx 10: se = sqrt(0.9 / 3 / 10)
    CHECK(g.slope == Approx(0.4));
    CHECK(g.t_stat == Approx(0.4 / std::sqrt(0.03)));
}

TEST_CASE("running stats merge equals sequential accumulation")
{
    stats::RunningStats all;
    stats::RunningStats a;
    stats::RunningStats b;
    for (int i = 0; i < 100; ++i)
    {
        double const x = std::sin(i) * 10 + i * 0.1;
        all.add(x);
        (i < 37 ? a : b).add(x);
    }
    a.merge(b);
    CHECK(a.count() == 100);
    CHECK(a.mean() == Approx(all.mean()).epsilon(1e-12));
    CHECK(a.variance() == Approx(all.variance()).epsilon(1e-12));
    stats::RunningStats empty;
    empty.merge(all);
    CHECK(empty.mean() == Approx(all.mean()));
}
