#include "ehaloha/model.hpp"

#include <cmath>

namespace ehaloha {

void ModelParams::validate() const
{
    if (!(lambda > 0.0 && lambda < 1.0))
    {
        throw std::invalid_argument("lambda must lie in (0,1)");
    }
    if (!(p > 0.0 && p <= 1.0))
    {
        throw std::invalid_argument("p must lie in (0,1]");
    }
    if (!(c > 0.0) || !std::isfinite(c))
    {
        throw std::invalid_argument("c must be positive");
    }
    if (auto const* pl = std::get_if<PowerLaw>(&harvest); pl && !(pl->alpha > 0.0))
    {
        throw std::invalid_argument("power-law exponent must be positive");
    }
    if (auto const* cr = std::get_if<ConstantRate>(&harvest);
        cr && !(cr->mu > 0.0 && cr->mu <= 1.0))
    {
        throw std::invalid_argument("constant harvest rate must lie in (0,1]");
    }
}

std::string to_string(ArrivalLaw law)
{
    switch (law)
    {
        case ArrivalLaw::poisson: return "poisson";
        case ArrivalLaw::bernoulli: return "bernoulli";
        case ArrivalLaw::geometric: return "geometric";
    }
    return "unknown";
}

ArrivalLaw parse_arrival_law(std::string const& name)
{
    if (name == "poisson")
    {
        return ArrivalLaw::poisson;
    }
    if (name == "bernoulli")
    {
        return ArrivalLaw::bernoulli;
    }
    if (name == "geometric")
    {
        return ArrivalLaw::geometric;
    }
    throw std::invalid_argument("unknown arrival law '" + name + "'");
}

double harvest_prob(Count q, ModelParams const& params)
{
    struct Visitor
    {
        Count q;
        double c;
        double operator()(Reciprocal) const
        {
            return q == 0 ? 1.0 : std::min(c / static_cast<double>(q), 1.0);
        }
        double operator()(PowerLaw const& pl) const
        {
            return q == 0 ? 1.0 : std::min(c / std::pow(static_cast<double>(q), pl.alpha), 1.0);
        }
        double operator()(ConstantRate const& cr) const { return cr.mu; }
    };
    return std::visit(Visitor{q, params.c}, params.harvest);
}

Count sample_arrivals(ModelParams const& params, RandomSource const& src, Slot slot)
{
    switch (params.arrival)
    {
        case ArrivalLaw::poisson:
            return poisson(src, slot, params.lambda, Family::arrival);
        case ArrivalLaw::bernoulli:
            return src.uniform(slot, 1, Family::arrival) < params.lambda ? 1 : 0;
        case ArrivalLaw::geometric: {
            double const r = params.lambda / (1.0 + params.lambda);
            double const u = src.uniform(slot, 1, Family::arrival);
            return static_cast<Count>(std::floor(std::log(u) / std::log(r)));
        }
    }
    return 0;
}

StepResult step_with_arrivals(SystemState state, ModelParams const& params,
                              RandomSource const& src, Slot slot, Count arrivals,
                              Coupling coupling)
{
    StepResult out;
    auto& rec = out.record;
    rec.slot = slot;
    rec.arrivals = arrivals;
    rec.attempts = binomial(src, slot, state.v, params.p,
                            {.family = Family::transmit, .coupling = coupling});
    rec.success = rec.attempts == 1;
    rec.collision = rec.attempts >= 2;
    rec.harvested = binomial(src, slot, state.q - state.v + arrivals, harvest_prob(state.q, params),
                             {.family = Family::harvest, .coupling = coupling});
    out.next.q = state.q - (rec.success ? 1 : 0) + arrivals;
    out.next.v = state.v - rec.attempts + rec.harvested;
    rec.state_after = out.next;
    return out;
}

StepResult step(SystemState state, ModelParams const& params, RandomSource const& src, Slot slot,
                Coupling coupling)
{
    return step_with_arrivals(state, params, src, slot, sample_arrivals(params, src, slot),
                              coupling);
}

CeilingExceeded::CeilingExceeded(Slot slot, Count q, Count ceiling)
    : std::runtime_error("population " + std::to_string(q) + " exceeded ceiling "
                         + std::to_string(ceiling) + " at slot " + std::to_string(slot)),
      slot_(slot),
      q_(q)
{
}

Trajectory simulate(SystemState initial, ModelParams const& params, Slot horizon,
                    RandomSource const& src, SimulationOptions const& opts)
{
    if (horizon < 1)
    {
        throw std::invalid_argument("simulate: horizon must be >= 1");
    }
    if (opts.stride < 1)
    {
        throw std::invalid_argument("simulate: stride must be >= 1");
    }
    if (!initial.valid())
    {
        throw std::invalid_argument("simulate: initial state violates 0 <= v <= q");
    }
    params.validate();

    Trajectory traj;
    traj.initial = initial;
    traj.params = params;
    traj.horizon = horizon;
    traj.stride = opts.stride;
    traj.records.reserve(static_cast<std::size_t>((horizon + opts.stride - 1) / opts.stride));

    auto& sum = traj.summary;
    long double q_total = 0.0L;
    long double v_total = 0.0L;
    Slot n = 0;
    sum.final_state = run_chain(
        initial, params, horizon, src,
        [&](SlotRecord const& rec) {
            if (n % opts.stride == 0)
            {
                traj.records.push_back(rec);
            }
            ++n;
            q_total += static_cast<long double>(rec.state_after.q);
            v_total += static_cast<long double>(rec.state_after.v);
            sum.max_q = std::max(sum.max_q, rec.state_after.q);
            sum.arrivals += rec.arrivals;
            sum.successes += rec.success ? 1 : 0;
            sum.collisions += rec.collision ? 1 : 0;
            sum.harvested += rec.harvested;
        },
        opts);
    sum.slots = horizon;
    sum.mean_q = static_cast<double>(q_total / static_cast<long double>(horizon));
    sum.mean_v = static_cast<double>(v_total / static_cast<long double>(horizon));
    return traj;
}

}  // namespace ehaloha
