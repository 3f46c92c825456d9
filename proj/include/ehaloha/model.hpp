#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ehaloha/sampling.hpp"

namespace ehaloha {

//! (q, v): messages present and messages holding an energy unit.
struct SystemState
{
    Count q = 0;
    Count v = 0;

    bool valid() const noexcept { return 0 <= v && v <= q; }
    friend bool operator==(SystemState const&, SystemState const&) = default;
};

enum class ArrivalLaw
{
    poisson,
    bernoulli,
    geometric,  //!< P(k) = (1-r) r^k with mean r/(1-r) = lambda
};

//! mu(q) = min(c/q, 1)
struct Reciprocal
{
    friend bool operator==(Reciprocal const&, Reciprocal const&) = default;
};
//! mu(q) = min(c/q^alpha, 1)
struct PowerLaw
{
    double alpha = 1.0;
    friend bool operator==(PowerLaw const&, PowerLaw const&) = default;
};
//! mu(q) = mu, independent of the population
struct ConstantRate
{
    double mu = 1.0;
    friend bool operator==(ConstantRate const&, ConstantRate const&) = default;
};

using HarvestPolicy = std::variant<Reciprocal, PowerLaw, ConstantRate>;

struct ModelParams
{
    double lambda = 0.3;
    ArrivalLaw arrival = ArrivalLaw::poisson;
    double p = 0.5;
    double c = 1.0;
    HarvestPolicy harvest = Reciprocal{};

    //! Throws std::invalid_argument on lambda outside (0,1), p outside (0,1], c <= 0.
    void validate() const;

    friend bool operator==(ModelParams const&, ModelParams const&) = default;
};

std::string to_string(ArrivalLaw law);
ArrivalLaw parse_arrival_law(std::string const& name);

//! Per-message harvest probability at population q. Value 1 at q = 0.
double harvest_prob(Count q, ModelParams const& params);

//! Arrivals in one slot, drawn from the arrival family at index 1.
Count sample_arrivals(ModelParams const& params, RandomSource const& src, Slot slot);

struct SlotRecord
{
    Slot slot = 0;
    Count arrivals = 0;
    Count attempts = 0;
    bool success = false;
    bool collision = false;
    Count harvested = 0;
    SystemState state_after;
};

struct StepResult
{
    SystemState next;
    SlotRecord record;
};

//! One slot of the chain with the arrival count supplied by the caller.
StepResult step_with_arrivals(SystemState state, ModelParams const& params,
                              RandomSource const& src, Slot slot, Count arrivals,
                              Coupling coupling = Coupling::aggregate);

//! One slot of the chain:
//!   q' = q - 1{attempts == 1} + arrivals
//!   v' = v - attempts + Binomial(q - v + arrivals, mu(q))
//! Every attempting message spends its energy unit, collided or not.
StepResult step(SystemState state, ModelParams const& params, RandomSource const& src, Slot slot,
                Coupling coupling = Coupling::aggregate);

//! Raised when the population passes the configured ceiling.
class CeilingExceeded : public std::runtime_error
{
  public:
    CeilingExceeded(Slot slot, Count q, Count ceiling);
    Slot slot() const noexcept { return slot_; }
    Count population() const noexcept { return q_; }

  private:
    Slot slot_;
    Count q_;
};

struct SimulationOptions
{
    //! Keep every stride-th record (slots with index % stride == 0).
    Slot stride = 1;
    Count q_ceiling = Count{1} << 48;
    Slot first_slot = 0;
    Coupling coupling = Coupling::aggregate;
};

struct TrajectorySummary
{
    SystemState final_state;
    Slot slots = 0;
    double mean_q = 0.0;
    double mean_v = 0.0;
    Count max_q = 0;
    Count arrivals = 0;
    Count successes = 0;
    Count collisions = 0;
    Count harvested = 0;
};

struct Trajectory
{
    SystemState initial;
    ModelParams params;
    Slot horizon = 0;
    Slot stride = 1;
    std::vector<SlotRecord> records;
    TrajectorySummary summary;
};

//---------------------------------------------------------------------------//
/*!
 * Drive the chain for `horizon` slots, handing each record to `observer`.
 *
 * Slot n of the run uses random address first_slot + n. Returns the final state.
 */
template<class Observer>
SystemState run_chain(SystemState initial, ModelParams const& params, Slot horizon,
                      RandomSource const& src, Observer&& observer,
                      SimulationOptions const& opts = {})
{
    SystemState state = initial;
    for (Slot n = 0; n < horizon; ++n)
    {
        Slot const slot = opts.first_slot + n;
        auto const res = step(state, params, src, slot, opts.coupling);
        state = res.next;
        if (state.q > opts.q_ceiling)
        {
            throw CeilingExceeded(slot, state.q, opts.q_ceiling);
        }
        observer(res.record);
    }
    return state;
}

//! Full trajectory with downsampled records and exact online summary.
Trajectory simulate(SystemState initial, ModelParams const& params, Slot horizon,
                    RandomSource const& src, SimulationOptions const& opts = {});

}  // namespace ehaloha
