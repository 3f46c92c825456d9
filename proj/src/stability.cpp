#include "ehaloha/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ehaloha/parallel.hpp"
#include "ehaloha/stats.hpp"

namespace ehaloha::stability {

std::string to_string(Lyapunov l)
{
    return l == Lyapunov::q_plus_v ? "q_plus_v" : "q_only";
}

std::string to_string(Classification c)
{
    switch (c)
    {
        case Classification::stable: return "stable";
        case Classification::unstable: return "unstable";
        case Classification::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string to_string(Theory t)
{
    switch (t)
    {
        case Theory::stable: return "stable";
        case Theory::unstable: return "unstable";
        case Theory::boundary: return "boundary";
    }
    return "unknown";
}

namespace {

double lyapunov_value(SystemState s, Lyapunov l)
{
    return static_cast<double>(l == Lyapunov::q_plus_v ? s.q + s.v : s.q);
}

}  // namespace

DriftReport estimate_drift(DriftSpec const& spec, ModelParams const& params,
                           RandomSource const& src, unsigned threads)
{
    params.validate();
    if (spec.horizon_k < 1 || spec.replications < 1)
    {
        throw std::invalid_argument("estimate_drift: need k >= 1 and replications >= 1");
    }
    if (!spec.start.valid())
    {
        throw std::invalid_argument("estimate_drift: start state violates 0 <= v <= q");
    }
    std::size_t const chunks = chunk_count(spec.replications);
    std::vector<stats::RunningStats> partial(chunks);
    double const l0 = lyapunov_value(spec.start, spec.lyapunov);

    parallel_for(chunks, threads, [&](std::size_t chunk) {
        std::size_t const lo = chunk * kReplicationChunk;
        std::size_t const hi = std::min(spec.replications, lo + kReplicationChunk);
        for (std::size_t r = lo; r < hi; ++r)
        {
            auto const final_state = run_chain(spec.start, params,
                                               static_cast<Slot>(spec.horizon_k),
                                               src.substream(r), [](SlotRecord const&) {});
            partial[chunk].add(lyapunov_value(final_state, spec.lyapunov) - l0);
        }
    });
    stats::RunningStats total;
    for (auto const& part : partial)
    {
        total.merge(part);
    }
    DriftReport rep;
    rep.mean_drift = total.mean();
    rep.std_error = total.std_error();
    rep.ci_half_width = total.ci_half_width();
    rep.replications = spec.replications;
    return rep;
}

Count drift_radius(ModelParams const& params)
{
    return static_cast<Count>(std::ceil((params.c + params.lambda + 1.0) / params.p));
}

double one_step_drift(SystemState state, ModelParams const& params, Lyapunov lyapunov)
{
    auto const v = static_cast<double>(state.v);
    auto const q = static_cast<double>(state.q);
    double const single = state.v == 0 ? 0.0 : v * params.p * std::pow(1.0 - params.p, v - 1.0);
    double const dq = params.lambda - single;
    if (lyapunov == Lyapunov::q_only)
    {
        return dq;
    }
    double const dv = -params.p * v + harvest_prob(state.q, params) * (q - v + params.lambda);
    return dq + dv;
}

double theoretical_boundary(double c)
{
    return c * std::exp(-c);
}

Theory theoretical_sign(double lambda, double c, double margin)
{
    double const gap = theoretical_boundary(c) - lambda;
    if (std::abs(gap) <= margin)
    {
        return Theory::boundary;
    }
    return gap > 0.0 ? Theory::stable : Theory::unstable;
}

double default_q_low(ModelParams const& params)
{
    if (std::holds_alternative<Reciprocal>(params.harvest))
    {
        double const gap = theoretical_boundary(params.c) - params.lambda;
        if (gap > 0.0)
        {
            return std::max(10.0, 3.0 * params.lambda / gap);
        }
    }
    return 10.0;
}

StabilityResult classify_stability(ModelParams const& params, ClassifyOptions const& opts,
                                   RandomSource const& src)
{
    params.validate();
    if (opts.horizon < 10'000)
    {
        throw std::invalid_argument("classify_stability: horizon must be at least 1e4");
    }
    if (opts.windows < 3)
    {
        throw std::invalid_argument("classify_stability: need at least 3 windows");
    }
    auto const windows = static_cast<Slot>(opts.windows);
    Slot const window_len = opts.horizon / windows;
    Slot const used = window_len * windows;
    Slot const half = used / 2;

    StabilityResult res;
    auto& diag = res.diagnostics;
    diag.q_low = opts.q_low.value_or(default_q_low(params));

    std::vector<long double> sums(windows, 0.0L);
    Count low_visits = 0;
    Slot n = 0;
    SimulationOptions sim;
    sim.q_ceiling = opts.q_ceiling;
    diag.final_state = run_chain(
        SystemState{}, params, used, src,
        [&](SlotRecord const& rec) {
            auto const q = rec.state_after.q;
            sums[n / window_len] += static_cast<long double>(q);
            if (n >= half && static_cast<double>(q) <= diag.q_low)
            {
                ++low_visits;
            }
            ++n;
        },
        sim);

    diag.window_means.resize(windows);
    for (Slot w = 0; w < windows; ++w)
    {
        diag.window_means[w] = static_cast<double>(sums[w] / static_cast<long double>(window_len));
    }
    // The first window holds the transient from the empty state.
    std::vector<double> xs;
    std::vector<double> ys;
    for (Slot w = 1; w < windows; ++w)
    {
        xs.push_back(static_cast<double>(w));
        ys.push_back(diag.window_means[w]);
    }
    auto const fit = stats::linear_fit(xs, ys);
    diag.slope = fit.slope / static_cast<double>(window_len);
    diag.slope_t = fit.t_stat;
    diag.growth = diag.window_means.back() / std::max(diag.window_means.front(), 1.0);
    diag.return_freq = static_cast<double>(low_visits) / static_cast<double>(used - half);

    bool const trending = diag.slope_t > opts.slope_t_threshold;
    if (trending && diag.growth > opts.growth_factor)
    {
        res.classification = Classification::unstable;
    }
    else if (!trending && diag.return_freq > 0.0)
    {
        res.classification = Classification::stable;
    }
    else
    {
        res.classification = Classification::inconclusive;
    }
    return res;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t index)
{
    return mix64(master_seed ^ mix64(static_cast<std::uint64_t>(index) + 0x5851F42D4C957F2Dull));
}

PhaseTable phase_sweep(SweepConfig const& cfg, std::uint64_t master_seed)
{
    if (cfg.lambdas.empty() || cfg.cs.empty())
    {
        throw std::invalid_argument("phase_sweep: grids must be non-empty");
    }
    std::size_t const n_cells = cfg.lambdas.size() * cfg.cs.size();
    PhaseTable table;
    table.cells.resize(n_cells);

    parallel_for(n_cells, cfg.threads, [&](std::size_t idx) {
        auto& cell = table.cells[idx];
        cell.lambda = cfg.lambdas[idx / cfg.cs.size()];
        cell.c = cfg.cs[idx % cfg.cs.size()];
        cell.p = cfg.p;
        cell.seed = cell_seed(master_seed, idx);
        cell.theory = theoretical_sign(cell.lambda, cell.c, cfg.margin);

        ModelParams params;
        params.lambda = cell.lambda;
        params.c = cell.c;
        params.p = cfg.p;
        params.arrival = cfg.arrival;
        auto const res = classify_stability(params, cfg.classify, RandomSource(cell.seed));
        cell.classification = res.classification;
        cell.slope = res.diagnostics.slope;
        cell.slope_t = res.diagnostics.slope_t;
        cell.return_freq = res.diagnostics.return_freq;
    });

    for (auto const& cell : table.cells)
    {
        if (cell.theory == Theory::boundary)
        {
            continue;
        }
        ++table.scored;
        bool const match = (cell.theory == Theory::stable
                            && cell.classification == Classification::stable)
                           || (cell.theory == Theory::unstable
                               && cell.classification == Classification::unstable);
        table.agreed += match ? 1 : 0;
    }
    table.agreement = table.scored > 0 ? static_cast<double>(table.agreed) / table.scored : 1.0;

    for (std::size_t ic = 0; ic < cfg.cs.size(); ++ic)
    {
        StableExtent ext{cfg.cs[ic], 0.0};
        for (std::size_t il = 0; il < cfg.lambdas.size(); ++il)
        {
            auto const& cell = table.cells[il * cfg.cs.size() + ic];
            if (cell.classification != Classification::stable)
            {
                break;
            }
            ext.lambda_max = cell.lambda;
        }
        table.extents.push_back(ext);
    }
    return table;
}

bool extent_maximal_at(PhaseTable const& table, double c_star)
{
    if (table.extents.empty())
    {
        return false;
    }
    auto const nearest = std::min_element(
        table.extents.begin(), table.extents.end(), [&](StableExtent const& a, StableExtent const& b) {
            return std::abs(a.c - c_star) < std::abs(b.c - c_star);
        });
    return std::all_of(table.extents.begin(), table.extents.end(), [&](StableExtent const& e) {
        return e.lambda_max <= nearest->lambda_max;
    });
}

StabilityResult remark3_experiment(double alpha, double lambda, double c, double p,
                                   ClassifyOptions const& opts, RandomSource const& src)
{
    if (alpha == 1.0)
    {
        throw std::invalid_argument("remark3_experiment: alpha = 1 is the reciprocal policy");
    }
    ModelParams params;
    params.lambda = lambda;
    params.c = c;
    params.p = p;
    params.harvest = PowerLaw{alpha};
    return classify_stability(params, opts, src);
}

}  // namespace ehaloha::stability
