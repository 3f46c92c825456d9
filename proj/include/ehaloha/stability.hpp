#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ehaloha/model.hpp"

namespace ehaloha::stability {

enum class Lyapunov
{
    q_plus_v,  //!< L(q, v) = q + v
    q_only,    //!< L(q, v) = q
};

std::string to_string(Lyapunov l);

struct DriftSpec
{
    Lyapunov lyapunov = Lyapunov::q_plus_v;
    SystemState start{};
    int horizon_k = 1;
    std::size_t replications = 1000;
};

struct DriftReport
{
    double mean_drift = 0.0;
    double ci_half_width = 0.0;  //!< 95%
    double std_error = 0.0;
    std::size_t replications = 0;

    bool excludes_zero() const noexcept { return std::abs(mean_drift) > ci_half_width; }
};

//! Mean of L(X_k) - L(X_0) over independent k-step runs from a fixed start.
DriftReport estimate_drift(DriftSpec const& spec, ModelParams const& params,
                           RandomSource const& src, unsigned threads = 1);

//! ceil((c + lambda + 1) / p): energized populations above this drift down in one step.
Count drift_radius(ModelParams const& params);

//! Exact one-step mean drift of L at (q, v); used as an oracle for estimate_drift.
double one_step_drift(SystemState state, ModelParams const& params, Lyapunov lyapunov);

double theoretical_boundary(double c);

enum class Classification
{
    stable,
    unstable,
    inconclusive,
};

enum class Theory
{
    stable,
    unstable,
    boundary,
};

std::string to_string(Classification c);
std::string to_string(Theory t);

//! Sign of c e^{-c} - lambda, or boundary when |lambda - c e^{-c}| <= margin.
Theory theoretical_sign(double lambda, double c, double margin);

struct ClassifyOptions
{
    Slot horizon = 1'000'000;
    int windows = 40;
    double slope_t_threshold = 3.0;
    double growth_factor = 5.0;
    //! Low set {q <= q_low} for the recurrence check; default depends on params.
    std::optional<double> q_low;
    Count q_ceiling = Count{1} << 48;
};

struct Diagnostics
{
    std::vector<double> window_means;
    double slope = 0.0;  //!< trend of q per slot (window means, first window excluded)
    double slope_t = 0.0;
    double growth = 0.0;  //!< last window mean / max(first window mean, 1)
    double q_low = 0.0;
    double return_freq = 0.0;  //!< fraction of second-half slots with q <= q_low
    SystemState final_state;
};

struct StabilityResult
{
    Classification classification = Classification::inconclusive;
    Diagnostics diagnostics;
};

//! Default q_low: max(10, 3 lambda / (c e^{-c} - lambda)) below the boundary, else 10.
double default_q_low(ModelParams const& params);

//---------------------------------------------------------------------------//
/*!
 * Classify one long run from (0, 0).
 *
 * Unstable: window means trend upward with t > slope_t_threshold and the last
 * window exceeds growth_factor times the first. Stable: no significant upward
 * trend and the run still visits {q <= q_low} in its second half.
 * Anything else is inconclusive.
 */
StabilityResult classify_stability(ModelParams const& params, ClassifyOptions const& opts,
                                   RandomSource const& src);

struct PhaseCell
{
    double lambda = 0.0;
    double c = 0.0;
    double p = 0.0;
    Classification classification = Classification::inconclusive;
    Theory theory = Theory::boundary;
    double slope = 0.0;
    double slope_t = 0.0;
    double return_freq = 0.0;
    std::uint64_t seed = 0;
};

struct SweepConfig
{
    std::vector<double> lambdas;
    std::vector<double> cs;
    double p = 0.5;
    ArrivalLaw arrival = ArrivalLaw::poisson;
    ClassifyOptions classify;
    double margin = 0.05;
    unsigned threads = 1;
};

struct StableExtent
{
    double c = 0.0;
    //! Largest grid lambda with every grid lambda up to it classified stable; 0 if none.
    double lambda_max = 0.0;
};

struct PhaseTable
{
    std::vector<PhaseCell> cells;  //!< lambda-major, c-minor
    int scored = 0;
    int agreed = 0;
    double agreement = 0.0;
    std::vector<StableExtent> extents;
};

//! Seed of cell `index` in a sweep; independent of evaluation order.
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t index);

PhaseTable phase_sweep(SweepConfig const& cfg, std::uint64_t master_seed);

//! True when no c in the table has a larger stable extent than the one nearest c_star.
bool extent_maximal_at(PhaseTable const& table, double c_star);

//! Classification under mu(q) = min(c / q^alpha, 1).
StabilityResult remark3_experiment(double alpha, double lambda, double c, double p,
                                   ClassifyOptions const& opts, RandomSource const& src);

}  // namespace ehaloha::stability
