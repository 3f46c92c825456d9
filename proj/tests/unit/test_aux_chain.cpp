#include <doctest.h>

#include <cmath>

#include "ehaloha/aux_chain.hpp"
#include "oracles.hpp"

using namespace ehaloha;
using doctest::Approx;

TEST_CASE("stationary law and limiting success probability")
{
    CHECK(aux::stationary_pmf(0, 1.0, 0.5) == Approx(std::exp(-2.0)));
    CHECK(aux::stationary_pmf(3, 1.0, 0.5) == Approx(8.0 / 6.0 * std::exp(-2.0)));
    CHECK(aux::success_prob_limit(1.0) == Approx(std::exp(-1.0)));
    CHECK(aux::success_prob_limit(2.0) == Approx(2.0 * std::exp(-2.0)));
}

TEST_CASE("success probability limit equals the stationary series for every p")
{
    // sum_j pi_j * j p (1-p)^(j-1) with pi = Poisson(c/p)
    for (double c : {0.5, 1.0, 2.0})
    {
        for (double p : {0.1, 0.5, 0.9, 1.0})
        {
            auto const pi = ehaloha::testing::poisson_law(c / p, 200);
            double s = 0.0;
            for (std::size_t j = 1; j + 1 < pi.size(); ++j)
            {
                s += pi[j] * static_cast<double>(j) * p * std::pow(1.0 - p, static_cast<double>(j - 1));
            }
            CHECK(s == Approx(aux::success_prob_limit(c)).epsilon(1e-10));
        }
    }
}

TEST_CASE("aux step bookkeeping")
{
    RandomSource const src(3);
    aux::AuxState st{5};
    for (Slot s = 0; s < 10'000; ++s)
    {
        auto const out = aux::step_aux_traced(st, 0.5, 1.0, src, s);
        REQUIRE(out.departures >= 0);
        REQUIRE(out.departures <= st.v_tilde);
        REQUIRE(out.next.v_tilde >= st.v_tilde - out.departures);
        CHECK(aux::step_aux(st, 0.5, 1.0, src, s) == out.next);
        st = out.next;
    }
}

TEST_CASE("with p = 1 every message departs")
{
    RandomSource const src(6);
    aux::AuxState st{4};
    auto const out = aux::step_aux_traced(st, 1.0, 1.0, src, 0);
    CHECK(out.departures == 4);
}

TEST_CASE("empirical success rate is close to c e^{-c}")
{
    auto const est = aux::empirical_success_rate(1.0, 0.5, 200'000, 1'000, RandomSource(12));
    CHECK(est.samples == 199'000);
    CHECK(std::abs(est.estimate - std::exp(-1.0)) < 0.01);
    CHECK(est.half_width > 0.0);
    CHECK_THROWS(aux::empirical_success_rate(1.0, 0.5, 100, 100, RandomSource(1)));
    CHECK_THROWS(aux::empirical_success_rate(1.0, 0.0, 1000, 10, RandomSource(1)));
}

TEST_CASE("marginal curve from zero starts with no departures")
{
    auto const mc = aux::marginal_curve(Count{0}, 1.0, 0.5, 20, 5'000, RandomSource(2));
    REQUIRE(mc.success_prob.size() == 21);
    CHECK(mc.success_prob[0] == 0.0);
    CHECK(mc.tv_distance[0] == Approx(1.0 - std::exp(-2.0)));
    CHECK(mc.tv_distance[20] < 0.05);
    CHECK(std::abs(mc.success_prob[20] - std::exp(-1.0)) < 0.03);
}

TEST_CASE("marginal curve is independent of the thread count")
{
    auto const a = aux::marginal_curve(std::nullopt, 1.0, 0.5, 10, 3'000, RandomSource(9), 1);
    auto const b = aux::marginal_curve(std::nullopt, 1.0, 0.5, 10, 3'000, RandomSource(9), 3);
    CHECK(a.success_prob == b.success_prob);
    CHECK(a.tv_distance == b.tv_distance);
}

TEST_CASE("stationary start stays stationary")
{
    for (int n : {0, 3})
    {
        auto const states = aux::sample_states(std::nullopt, 1.5, 0.6, n, 40'000, RandomSource(21));
        auto const bins = aux::stationary_support(1.5, 0.6);
        auto const g = stats::chi_square_gof(stats::histogram(states, bins),
                                             ehaloha::testing::poisson_law(1.5 / 0.6, bins));
        CAPTURE(n);
        CHECK(g.p_value > 1e-3);
    }
}

TEST_CASE("convergence lag edge cases")
{
    aux::LagOptions opts;
    opts.horizon_cap = 30;
    // Tolerance 1 exceeds every possible error: the lag is 0.
    auto const vacuous = aux::convergence_lag(1.0, 0.5, 3, 3.0, 2'000, RandomSource(5), opts);
    CHECK(vacuous.converged);
    CHECK(vacuous.lag == 0);
    CHECK(vacuous.curves.size() == 4);

    // From V = 0 the first step has error e^{-1} > 1/3.
    auto const strict = aux::convergence_lag(1.0, 0.5, 0, 1.0, 2'000, RandomSource(5), opts);
    CHECK(strict.converged);
    CHECK(strict.lag >= 1);

    // A tolerance below the sampling margin cannot be met.
    auto const hopeless = aux::convergence_lag(1.0, 0.5, 1, 1e-4, 1'000, RandomSource(5), opts);
    CHECK_FALSE(hopeless.converged);
    CHECK(hopeless.lag == -1);

    CHECK_THROWS(aux::convergence_lag(1.0, 0.5, -1, 0.1, 100, RandomSource(5)));
    CHECK_THROWS(aux::convergence_lag(1.0, 0.5, 1, 0.0, 100, RandomSource(5)));
}

TEST_CASE("ergodicity proxy decays geometrically")
{
    auto const e = aux::ergodicity_proxy(1.0, 0.5, 40, 20'000, RandomSource(13));
    CHECK(e.slope < 0.0);
    CHECK(e.fitted_points >= 3);
    CHECK(e.final_tv < 3 * e.noise_floor);
}
