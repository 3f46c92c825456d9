#include "ehaloha/aux_chain.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "ehaloha/parallel.hpp"

namespace ehaloha::aux {

namespace {

constexpr double kTruncationTail = 1e-9;
constexpr double kZ95 = 1.959963984540054;

void check_params(double p, double c)
{
    if (!(p > 0.0 && p <= 1.0))
    {
        throw std::invalid_argument("aux chain: p must lie in (0,1]");
    }
    if (!(c > 0.0))
    {
        throw std::invalid_argument("aux chain: c must be positive");
    }
}

Count initial_value(Start const& start, double c, double p, RandomSource const& src)
{
    return start ? *start : poisson(src, 0, c / p, Family::aux);
}

}  // namespace

AuxStep step_aux_traced(AuxState state, double p, double c, RandomSource const& src, Slot slot)
{
    AuxStep out;
    out.departures = binomial(src, slot, state.v_tilde, p, {.family = Family::transmit});
    out.next.v_tilde = state.v_tilde - out.departures + poisson(src, slot, c, Family::aux);
    return out;
}

double stationary_pmf(Count j, double c, double p)
{
    return stats::poisson_pmf(j, c / p);
}

double success_prob_limit(double c)
{
    return c * std::exp(-c);
}

std::size_t stationary_support(double c, double p)
{
    return stats::poisson_support(c / p, kTruncationTail);
}

Estimate empirical_success_rate(double c, double p, Slot horizon, Slot burn_in,
                                RandomSource const& src)
{
    check_params(p, c);
    if (horizon <= burn_in)
    {
        throw std::invalid_argument("empirical_success_rate: horizon must exceed burn-in");
    }
    AuxState state;
    Count hits = 0;
    for (Slot n = 0; n < horizon; ++n)
    {
        auto const st = step_aux_traced(state, p, c, src, n);
        if (n >= burn_in && st.departures == 1)
        {
            ++hits;
        }
        state = st.next;
    }
    Estimate est;
    est.samples = static_cast<Count>(horizon - burn_in);
    est.estimate = static_cast<double>(hits) / static_cast<double>(est.samples);
    est.half_width
        = kZ95 * std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(est.samples));
    return est;
}

MarginalCurve marginal_curve(Start start, double c, double p, int steps, std::size_t replications,
                             RandomSource const& src, unsigned threads)
{
    check_params(p, c);
    if (steps < 0 || replications == 0)
    {
        throw std::invalid_argument("marginal_curve: need steps >= 0 and replications > 0");
    }
    std::size_t const bins = stationary_support(c, p);
    auto const n_points = static_cast<std::size_t>(steps) + 1;

    std::vector<Count> success(n_points, 0);
    std::vector<Count> hist(n_points * bins, 0);
    std::mutex merge_mutex;

    parallel_for(chunk_count(replications), threads, [&](std::size_t chunk) {
        std::vector<Count> loc_success(n_points, 0);
        std::vector<Count> loc_hist(n_points * bins, 0);
        std::size_t const lo = chunk * kReplicationChunk;
        std::size_t const hi = std::min(replications, lo + kReplicationChunk);
        for (std::size_t r = lo; r < hi; ++r)
        {
            auto const sub = src.substream(r);
            AuxState state{initial_value(start, c, p, sub)};
            for (std::size_t n = 0; n < n_points; ++n)
            {
                auto const b = std::min<std::size_t>(static_cast<std::size_t>(state.v_tilde), bins - 1);
                ++loc_hist[n * bins + b];
                auto const st = step_aux_traced(state, p, c, sub, n + 1);
                loc_success[n] += st.departures == 1;
                state = st.next;
            }
        }
        std::lock_guard lock(merge_mutex);
        for (std::size_t i = 0; i < n_points; ++i)
        {
            success[i] += loc_success[i];
        }
        for (std::size_t i = 0; i < hist.size(); ++i)
        {
            hist[i] += loc_hist[i];
        }
    });

    auto const probs = stats::poisson_bins(c / p, bins);
    MarginalCurve out;
    out.start = start;
    out.replications = replications;
    out.success_prob.resize(n_points);
    out.tv_distance.resize(n_points);
    for (std::size_t n = 0; n < n_points; ++n)
    {
        out.success_prob[n] = static_cast<double>(success[n]) / static_cast<double>(replications);
        out.tv_distance[n] = stats::tv_distance(
            std::span<Count const>(hist.data() + n * bins, bins), probs);
    }
    return out;
}

std::vector<Count> sample_states(Start start, double c, double p, int n, std::size_t replications,
                                 RandomSource const& src, unsigned threads)
{
    check_params(p, c);
    std::vector<Count> out(replications);
    parallel_for(chunk_count(replications), threads, [&](std::size_t chunk) {
        std::size_t const lo = chunk * kReplicationChunk;
        std::size_t const hi = std::min(replications, lo + kReplicationChunk);
        for (std::size_t r = lo; r < hi; ++r)
        {
            auto const sub = src.substream(r);
            AuxState state{initial_value(start, c, p, sub)};
            for (int k = 0; k < n; ++k)
            {
                state = step_aux(state, p, c, sub, static_cast<Slot>(k) + 1);
            }
            out[r] = state.v_tilde;
        }
    });
    return out;
}

LagResult convergence_lag(double c, double p, Count radius, double delta, std::size_t replications,
                          RandomSource const& src, LagOptions const& opts)
{
    check_params(p, c);
    if (radius < 0 || !(delta > 0.0))
    {
        throw std::invalid_argument("convergence_lag: need R >= 0 and delta > 0");
    }
    double const target = success_prob_limit(c);
    LagResult res;
    res.tolerance = delta / 3.0;
    res.half_width = kZ95 * std::sqrt(target * (1.0 - target) / static_cast<double>(replications));

    for (Count v0 = 0; v0 <= radius; ++v0)
    {
        res.curves.push_back(marginal_curve(v0, c, p, opts.horizon_cap, replications,
                                            src.substream(static_cast<std::uint64_t>(v0)),
                                            opts.threads));
    }

    auto const within = [&](std::size_t n) {
        return std::all_of(res.curves.begin(), res.curves.end(), [&](MarginalCurve const& mc) {
            return std::abs(mc.success_prob[n] - target) + res.half_width < res.tolerance;
        });
    };

    // Scan backwards from the cap for the start of the final in-tolerance run.
    auto n = static_cast<std::size_t>(opts.horizon_cap) + 1;
    while (n > 0 && within(n - 1))
    {
        --n;
    }
    if (n <= static_cast<std::size_t>(opts.horizon_cap))
    {
        res.converged = true;
        res.lag = static_cast<int>(n);
    }
    return res;
}

ErgodicityProxy ergodicity_proxy(double c, double p, int steps, std::size_t replications,
                                 RandomSource const& src, unsigned threads)
{
    return ergodicity_from_curve(marginal_curve(Count{0}, c, p, steps, replications, src, threads),
                                 c, p);
}

ErgodicityProxy ergodicity_from_curve(MarginalCurve const& curve, double c, double p)
{
    auto const replications = curve.replications;
    auto const probs = stats::poisson_bins(c / p, stationary_support(c, p));

    ErgodicityProxy out;
    // Expected TV of an exact sample of this size against its own law.
    double floor = 0.0;
    for (double pi : probs)
    {
        floor += std::sqrt(2.0 / M_PI * pi * (1.0 - pi) / static_cast<double>(replications));
    }
    out.noise_floor = 0.5 * floor;
    out.final_tv = curve.tv_distance.back();

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n = 0; n < curve.tv_distance.size(); ++n)
    {
        if (curve.tv_distance[n] <= 2.0 * out.noise_floor)
        {
            break;
        }
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(curve.tv_distance[n]));
    }
    auto const fit = stats::linear_fit(xs, ys);
    out.slope = fit.slope;
    out.r_squared = fit.r_squared;
    out.fitted_points = static_cast<int>(xs.size());
    return out;
}

}  // namespace ehaloha::aux
