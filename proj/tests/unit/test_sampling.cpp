#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "ehaloha/sampling.hpp"
#include "ehaloha/stats.hpp"
#include "oracles.hpp"

using namespace ehaloha;
using ehaloha::testing::ScriptedSource;

namespace {

std::vector<double> binomial_law(Count k, double p)
{
    std::vector<double> out;
    for (Count j = 0; j <= k; ++j)
    {
        out.push_back(ehaloha::testing::binom_pmf(j, k, p));
    }
    return out;
}

double binomial_gof(RandomSource const& src, Count k, double p, Coupling coupling, int n)
{
    std::vector<Count> hist(static_cast<std::size_t>(k) + 1, 0);
    for (int s = 0; s < n; ++s)
    {
        ++hist[static_cast<std::size_t>(
            binomial(src, static_cast<Slot>(s), k, p, {.coupling = coupling}))];
    }
    return stats::chi_square_gof(hist, binomial_law(k, p)).p_value;
}

}  // namespace

TEST_CASE("uniforms are deterministic, open-interval and address-sensitive")
{
    RandomSource const a(7);
    RandomSource const b(7);
    std::set<double> seen;
    for (Slot s = 0; s < 50; ++s)
    {
        for (std::uint64_t i = 1; i <= 4; ++i)
        {
            double const u = a.uniform(s, i, Family::transmit);
            CHECK(u > 0.0);
            CHECK(u < 1.0);
            CHECK(u == b.uniform(s, i, Family::transmit));
            seen.insert(u);
        }
    }
    CHECK(seen.size() == 200);
    CHECK(a.uniform(3, 1, Family::transmit) != a.uniform(3, 1, Family::harvest));
    CHECK(a.uniform(3, 1, Family::transmit) != RandomSource(8).uniform(3, 1, Family::transmit));
    CHECK(a.uniform(3, 1, Family::transmit) != a.substream(1).uniform(3, 1, Family::transmit));
    CHECK(a.substream(5).uniform(0, 1, Family::aux) == b.substream(5).uniform(0, 1, Family::aux));
}

TEST_CASE("to_unit maps the extreme words inside (0,1)")
{
    CHECK(RandomSource::to_unit(0) == 0x1.0p-53);
    CHECK(RandomSource::to_unit(~std::uint64_t{0}) == 1.0 - 0x1.0p-53);
}

TEST_CASE("uniform mean and variance")
{
    RandomSource const src(11);
    stats::RunningStats rs;
    for (Slot s = 0; s < 200'000; ++s)
    {
        rs.add(src.uniform(s, 1 + s % 3, Family::arrival));
    }
    CHECK(rs.mean() == doctest::Approx(0.5).epsilon(0.005));
    CHECK(rs.variance() == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("pathwise binomial counts uniforms below the probability")
{
    RandomSource const src(3);
    for (Slot s = 0; s < 100; ++s)
    {
        Count expect = 0;
        for (std::uint64_t i = 11; i <= 30; ++i)
        {
            expect += src.uniform(s, i, Family::harvest) < 0.37;
        }
        CHECK(binomial(src, s, 20, 0.37, {.family = Family::harvest, .offset = 10}) == expect);
    }
}

TEST_CASE("binomial edge cases")
{
    RandomSource const src(1);
    CHECK(binomial(src, 0, 0, 0.5) == 0);
    CHECK(binomial(src, 0, 17, 0.0) == 0);
    CHECK(binomial(src, 0, 17, 1.0) == 17);
    CHECK(binomial(src, 0, 1000, 1.0, {.coupling = Coupling::aggregate}) == 1000);
    CHECK_THROWS_AS(binomial(src, 0, -1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(binomial(src, 0, 5, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(binomial(src, 0, 5, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(binomial(src, 0, 5, 0.5, {.offset = RandomSource::kMaxIndex}),
                    std::out_of_range);
}

TEST_CASE("thin is the complement of a binomial on the same uniforms")
{
    RandomSource const src(5);
    for (Slot s = 0; s < 500; ++s)
    {
        Count const k = static_cast<Count>(s % 40);
        CHECK(thin(src, s, k, 0.3) + binomial(src, s, k, 0.7) == k);
    }
}

TEST_CASE("compose_thin matches Binomial(k, s^m) by exhaustive enumeration")
{
    // Every indicator of every slot is set to delete or keep; each full grid
    // pattern is weighted by its probability and run through compose_thin.
    for (double s : {0.3, 0.6})
    {
        for (Count k : {1, 2, 3})
        {
            for (int m : {1, 2, 3})
            {
                int const cells = static_cast<int>(k) * m;
                std::vector<double> law(static_cast<std::size_t>(k) + 1, 0.0);
                for (std::uint32_t mask = 0; mask < (1u << cells); ++mask)
                {
                    double w = 1.0;
                    for (int b = 0; b < cells; ++b)
                    {
                        w *= (mask >> b & 1u) ? 1.0 - s : s;
                    }
                    ScriptedSource const src{[&](Slot slot, std::uint64_t i, Family) {
                        int const bit = static_cast<int>(slot) * static_cast<int>(k)
                                        + static_cast<int>(i) - 1;
                        return ehaloha::testing::side_of(1.0 - s, mask >> bit & 1u);
                    }};
                    law[static_cast<std::size_t>(compose_thin(src, 0, k, s, m))] += w;
                }
                double const keep = std::pow(s, m);
                for (Count j = 0; j <= k; ++j)
                {
                    CHECK(law[static_cast<std::size_t>(j)]
                          == doctest::Approx(ehaloha::testing::binom_pmf(j, k, keep))
                                 .epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("compose_thin rejects zero steps")
{
    CHECK_THROWS_AS(compose_thin(RandomSource(1), 0, 3, 0.5, 0), std::invalid_argument);
}

TEST_CASE("aggregated binomial follows the binomial law on every branch")
{
    RandomSource const src(17);
    // inversion, std::binomial_distribution, and both through the p > 1/2 symmetry
    CHECK(binomial_gof(src, 400, 0.01, Coupling::aggregate, 40'000) > 1e-3);
    CHECK(binomial_gof(src.substream(1), 200, 0.3, Coupling::aggregate, 40'000) > 1e-3);
    CHECK(binomial_gof(src.substream(2), 400, 0.995, Coupling::aggregate, 40'000) > 1e-3);
    CHECK(binomial_gof(src.substream(3), 200, 0.8, Coupling::aggregate, 40'000) > 1e-3);
    CHECK(binomial_gof(src.substream(4), 20, 0.4, Coupling::pathwise, 40'000) > 1e-3);
}

TEST_CASE("aggregate coupling below the threshold is pathwise")
{
    RandomSource src(2);
    src.set_aggregate_threshold(64);
    for (Slot s = 0; s < 50; ++s)
    {
        CHECK(binomial(src, s, 64, 0.4, {.coupling = Coupling::aggregate})
              == binomial(src, s, 64, 0.4));
    }
}

TEST_CASE("poisson inversion quantiles")
{
    // cdf of Poisson(2): 0.1353, 0.4060, 0.6767, 0.8571
    CHECK(poisson_inversion(0.1, 2.0) == 0);
    CHECK(poisson_inversion(0.2, 2.0) == 1);
    CHECK(poisson_inversion(0.5, 2.0) == 2);
    CHECK(poisson_inversion(0.8, 2.0) == 3);
    CHECK(poisson_inversion(0.9, 2.0) == 4);
    CHECK(poisson_inversion(0.5, 0.0) == 0);
}

TEST_CASE("poisson draws follow the poisson law")
{
    for (double rate : {0.3, 2.0, 45.0})
    {
        RandomSource const src(23);
        std::size_t const bins = stats::poisson_support(rate, 1e-9);
        std::vector<Count> draws;
        for (Slot s = 0; s < 50'000; ++s)
        {
            draws.push_back(poisson(src, s, rate));
        }
        auto const gof = stats::chi_square_gof(stats::histogram(draws, bins),
                                               ehaloha::testing::poisson_law(rate, bins));
        CAPTURE(rate);
        CHECK(gof.p_value > 1e-3);
    }
}

TEST_CASE("engines replay and differ by family")
{
    RandomSource const src(9);
    auto e1 = src.engine(4, Family::arrival);
    auto e2 = src.engine(4, Family::arrival);
    auto e3 = src.engine(4, Family::aux);
    for (int i = 0; i < 10; ++i)
    {
        auto const x = e1();
        CHECK(x == e2());
        CHECK(x != e3());
    }
}

TEST_CASE("family names")
{
    CHECK(to_string(Family::transmit) == "transmit");
    CHECK(to_string(Family::aux) == "aux");
}
