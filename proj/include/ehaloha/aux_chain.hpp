#pragma once

#include <optional>
#include <vector>

#include "ehaloha/sampling.hpp"
#include "ehaloha/stats.hpp"

namespace ehaloha::aux {

//! State of the one-dimensional chain V' = V - Binomial(V, p) + Poisson(c).
struct AuxState
{
    Count v_tilde = 0;
    friend bool operator==(AuxState const&, AuxState const&) = default;
};

struct AuxStep
{
    AuxState next;
    Count departures = 0;
};

//! One step: departures over the transmit family, Poisson(c) input from the aux family.
AuxStep step_aux_traced(AuxState state, double p, double c, RandomSource const& src, Slot slot);

inline AuxState step_aux(AuxState state, double p, double c, RandomSource const& src, Slot slot)
{
    return step_aux_traced(state, p, c, src, slot).next;
}

//! Stationary law of the chain: Poisson(c/p).
double stationary_pmf(Count j, double c, double p);

//! P(exactly one departure) under the stationary law: c e^{-c}, independent of p.
double success_prob_limit(double c);

struct Estimate
{
    double estimate = 0.0;
    double half_width = 0.0;  //!< normal-approximation 95%
    Count samples = 0;
};

//! Single long run from V = 0; fraction of post-burn-in slots with exactly one departure.
Estimate empirical_success_rate(double c, double p, Slot horizon, Slot burn_in,
                                RandomSource const& src);

//! Initial condition for replicated runs: a fixed value or a stationary draw.
using Start = std::optional<Count>;

//! Replicated marginal laws at times n = 0..steps from one initial condition.
//! Replication r uses src.substream(r); slot 0 holds the initial draw and
//! step n runs at slot n + 1.
struct MarginalCurve
{
    Start start;
    std::size_t replications = 0;
    std::vector<double> success_prob;  //!< P(exactly one departure at step n)
    std::vector<double> tv_distance;   //!< TV between law of V_n and Poisson(c/p)
};

MarginalCurve marginal_curve(Start start, double c, double p, int steps, std::size_t replications,
                             RandomSource const& src, unsigned threads = 1);

//! Values of V_n at a fixed n over independent replications.
std::vector<Count> sample_states(Start start, double c, double p, int n, std::size_t replications,
                                 RandomSource const& src, unsigned threads = 1);

struct LagOptions
{
    int horizon_cap = 400;
    unsigned threads = 1;
};

struct LagResult
{
    bool converged = false;
    //! Smallest l such that every checked n >= l is within tolerance; -1 on failure.
    int lag = -1;
    double tolerance = 0.0;   //!< delta / 3
    double half_width = 0.0;  //!< sampling margin folded into the check
    std::vector<MarginalCurve> curves;  //!< one per initial value 0..R
};

//! Smallest lag after which P(one departure at step n) is within delta/3 of
//! c e^{-c} for every initial value in 0..R. Step n = 0 is the first step
//! taken from the initial value.
LagResult convergence_lag(double c, double p, Count radius, double delta, std::size_t replications,
                          RandomSource const& src, LagOptions const& opts = {});

struct ErgodicityProxy
{
    double final_tv = 0.0;
    double noise_floor = 0.0;
    double slope = 0.0;  //!< d log(TV) / dn over the pre-floor regime
    double r_squared = 0.0;
    int fitted_points = 0;
};

//! Log-linear fit of an existing curve's TV decay above its noise floor.
ErgodicityProxy ergodicity_from_curve(MarginalCurve const& curve, double c, double p);

//! TV decay from V = 0 towards Poisson(c/p), with a log-linear fit above the noise floor.
ErgodicityProxy ergodicity_proxy(double c, double p, int steps, std::size_t replications,
                                 RandomSource const& src, unsigned threads = 1);

//! Truncated support used for TV and goodness of fit: Poisson(c/p) tail < 1e-9.
std::size_t stationary_support(double c, double p);

}  // namespace ehaloha::aux
