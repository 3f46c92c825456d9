#include <doctest.h>

#include <map>

#include "ehaloha/model.hpp"
#include "ehaloha/stats.hpp"
#include "oracles.hpp"

using namespace ehaloha;
using doctest::Approx;

TEST_CASE("harvest probabilities")
{
    ModelParams mp;
    mp.c = 1.0;
    CHECK(harvest_prob(0, mp) == 1.0);
    CHECK(harvest_prob(1, mp) == 1.0);
    CHECK(harvest_prob(4, mp) == 0.25);
    mp.c = 2.5;
    CHECK(harvest_prob(2, mp) == 1.0);
    CHECK(harvest_prob(5, mp) == 0.5);
    mp.c = 1.0;
    mp.harvest = PowerLaw{2.0};
    CHECK(harvest_prob(4, mp) == Approx(1.0 / 16.0));
    CHECK(harvest_prob(0, mp) == 1.0);
    mp.harvest = PowerLaw{0.5};
    CHECK(harvest_prob(16, mp) == Approx(0.25));
    mp.harvest = ConstantRate{0.3};
    CHECK(harvest_prob(0, mp) == 0.3);
    CHECK(harvest_prob(1000, mp) == 0.3);
}

TEST_CASE("parameter validation")
{
    ModelParams mp;
    CHECK_NOTHROW(mp.validate());
    mp.lambda = 1.0;
    CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
    mp.lambda = 0.3;
    mp.p = 0.0;
    CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
    mp.p = 1.0;
    CHECK_NOTHROW(mp.validate());
    mp.c = 0.0;
    CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
    mp.c = 1.0;
    mp.harvest = PowerLaw{-1.0};
    CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
    mp.harvest = ConstantRate{1.5};
    CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
}

TEST_CASE("arrival law names round-trip")
{
    for (auto law : {ArrivalLaw::poisson, ArrivalLaw::bernoulli, ArrivalLaw::geometric})
    {
        CHECK(parse_arrival_law(to_string(law)) == law);
    }
    CHECK_THROWS(parse_arrival_law("uniform"));
}

TEST_CASE("arrival laws have mean lambda")
{
    RandomSource const src(31);
    for (auto law : {ArrivalLaw::poisson, ArrivalLaw::bernoulli, ArrivalLaw::geometric})
    {
        ModelParams mp;
        mp.lambda = 0.4;
        mp.arrival = law;
        stats::RunningStats rs;
        Count zeros = 0;
        for (Slot s = 0; s < 200'000; ++s)
        {
            auto const a = sample_arrivals(mp, src, s);
            rs.add(static_cast<double>(a));
            zeros += a == 0;
            if (law == ArrivalLaw::bernoulli)
            {
                REQUIRE(a <= 1);
            }
        }
        CAPTURE(to_string(law));
        CHECK(std::abs(rs.mean() - 0.4) < 5 * rs.std_error());
        double const p0 = law == ArrivalLaw::poisson     ? std::exp(-0.4)
                          : law == ArrivalLaw::bernoulli ? 0.6
                                                         : 1.0 / 1.4;
        CHECK(std::abs(static_cast<double>(zeros) / 2e5 - p0) < 0.005);
    }
}

TEST_CASE("one-step oracle is a probability law on valid states")
{
    for (Count q = 0; q <= 4; ++q)
    {
        for (Count v = 0; v <= q; ++v)
        {
            for (Count a = 0; a <= 2; ++a)
            {
                double total = 0.0;
                for (auto const& [state, w] : ehaloha::testing::one_step_law(q, v, a, 0.5, 0.5))
                {
                    total += w;
                    CHECK(state.second <= state.first);
                    CHECK(state.second >= 0);
                }
                CHECK(total == Approx(1.0).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("one-step frequencies match the enumerated kernel")
{
    ModelParams mp;
    mp.c = 1.0;
    mp.p = 0.4;
    RandomSource const src(77);
    for (SystemState const st : {SystemState{3, 2}, SystemState{4, 1}, SystemState{2, 2}})
    {
        Count const arrivals = 2;
        auto const law = ehaloha::testing::one_step_law(st.q, st.v, arrivals, mp.p,
                                                        harvest_prob(st.q, mp));
        std::map<std::pair<Count, Count>, Count> counts;
        int const n = 100'000;
        for (int r = 0; r < n; ++r)
        {
            auto const res = step_with_arrivals(st, mp, src.substream(r), 0, arrivals);
            ++counts[{res.next.q, res.next.v}];
        }
        std::vector<Count> obs;
        std::vector<double> probs;
        for (auto const& [state, w] : law)
        {
            probs.push_back(w);
            obs.push_back(counts[state]);
        }
        CHECK(counts.size() == law.size());
        CAPTURE(st.q);
        CAPTURE(st.v);
        CHECK(stats::chi_square_gof(obs, probs).p_value > 1e-3);
    }
}

TEST_CASE("step invariants along a trajectory")
{
    ModelParams mp;
    mp.lambda = 0.45;
    mp.c = 1.3;
    mp.p = 0.3;
    RandomSource const src(4);
    SystemState st;
    for (Slot s = 0; s < 50'000; ++s)
    {
        auto const res = step(st, mp, src, s);
        auto const& r = res.record;
        REQUIRE(res.next.valid());
        CHECK(r.slot == s);
        CHECK(r.attempts <= st.v);
        CHECK(r.harvested <= st.q - st.v + r.arrivals);
        CHECK(r.success == (r.attempts == 1));
        CHECK(r.collision == (r.attempts >= 2));
        CHECK(res.next.q == st.q - (r.success ? 1 : 0) + r.arrivals);
        CHECK(res.next.v == st.v - r.attempts + r.harvested);
        CHECK(r.state_after == res.next);
        st = res.next;
    }
}

TEST_CASE("aggregated harvest at a large population has the binomial law")
{
    ModelParams mp;
    mp.c = 1.0;
    SystemState const st{1'000'000, 3};
    RandomSource const src(19);
    std::size_t const bins = 10;
    std::vector<Count> harvested;
    for (int r = 0; r < 50'000; ++r)
    {
        harvested.push_back(step_with_arrivals(st, mp, src.substream(r), 0, 0).record.harvested);
    }
    Count const k = st.q - st.v;
    std::vector<double> probs(bins, 0.0);
    double head = 0.0;
    for (std::size_t j = 0; j + 1 < bins; ++j)
    {
        probs[j] = stats::binomial_pmf(static_cast<Count>(j), k, 1e-6);
        head += probs[j];
    }
    probs.back() = 1.0 - head;
    auto const hist = stats::histogram(harvested, bins);
    CHECK(stats::chi_square_gof(hist, probs).p_value > 1e-3);
    CHECK(stats::tv_distance(hist, probs) < 0.01);
}

TEST_CASE("simulate records every stride and keeps exact totals")
{
    ModelParams mp;
    RandomSource const src(42);
    SimulationOptions opts;
    opts.stride = 10;
    auto const traj = simulate(SystemState{}, mp, 1000, src, opts);
    REQUIRE(traj.records.size() == 100);
    for (std::size_t i = 0; i < traj.records.size(); ++i)
    {
        CHECK(traj.records[i].slot == 10 * i);
    }
    auto const& s = traj.summary;
    CHECK(s.slots == 1000);
    CHECK(s.final_state.q == s.arrivals - s.successes);
    CHECK(s.max_q >= s.final_state.q);

    auto const again = simulate(SystemState{}, mp, 1000, src, opts);
    CHECK(again.summary.final_state == s.final_state);
    CHECK(again.summary.mean_q == s.mean_q);
}

TEST_CASE("run_chain continues from an offset slot")
{
    ModelParams mp;
    RandomSource const src(8);
    auto const nop = [](SlotRecord const&) {};
    auto const mid = run_chain(SystemState{}, mp, 300, src, nop);
    SimulationOptions opts;
    opts.first_slot = 300;
    auto const end_split = run_chain(mid, mp, 200, src, nop, opts);
    CHECK(end_split == run_chain(SystemState{}, mp, 500, src, nop));
}

TEST_CASE("ceiling overflow aborts the run")
{
    ModelParams mp;
    mp.lambda = 0.9;
    SimulationOptions opts;
    opts.q_ceiling = 50;
    CHECK_THROWS_AS(simulate(SystemState{}, mp, 100'000, RandomSource(1), opts), CeilingExceeded);
    CHECK_THROWS(simulate(SystemState{}, mp, 0, RandomSource(1)));
}
