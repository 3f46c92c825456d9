#include "ehaloha/runner.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include "ehaloha/aux_chain.hpp"
#include "ehaloha/immigration.hpp"
#include "ehaloha/parallel.hpp"
#include "ehaloha/report.hpp"
#include "ehaloha/stability.hpp"

namespace ehaloha::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using report::Table;

namespace {

// Stream ids keep the sub-experiments of one command on disjoint randomness.
enum Stream : std::uint64_t
{
    kTrajectory = 1,
    kSuccessRate,
    kLag,
    kStationaryGof,
    kCouplingTail,
    kCouplingTailUnit,
    kMeanBound,
    kMonotone,
    kMarginal,
    kHomogeneity,
    kDrift,
};

void progress(std::string const& msg)
{
    std::cerr << "[ehaloha] " << msg << '\n';
}

class Writer
{
  public:
    explicit Writer(ExperimentConfig const& cfg)
        : dir_(cfg.out), json_(cfg.format == "json")
    {
        fs::create_directories(dir_);
    }

    void table(std::string const& stem, Table const& t)
    {
        if (json_)
        {
            ordered_json doc;
            doc["schema_version"] = report::kSchemaVersion;
            doc["columns"] = t.columns;
            doc["rows"] = report::to_json(t);
            emit(stem + ".json", doc);
        }
        else
        {
            auto const path = dir_ / (stem + ".csv");
            report::write_csv(path, t);
            artifacts_.push_back(path);
        }
    }

    void emit(std::string const& name, ordered_json doc)
    {
        if (!doc.contains("schema_version"))
        {
            ordered_json tagged;
            tagged["schema_version"] = report::kSchemaVersion;
            tagged.update(doc);
            doc = std::move(tagged);
        }
        auto const path = dir_ / name;
        report::write_json(path, doc);
        artifacts_.push_back(path);
    }

    std::vector<fs::path> take() { return std::move(artifacts_); }

  private:
    fs::path dir_;
    bool json_;
    std::vector<fs::path> artifacts_;
};

ordered_json gof_json(stats::GofResult const& g)
{
    ordered_json j;
    j["statistic"] = g.statistic;
    j["dof"] = g.dof;
    j["p_value"] = g.p_value;
    j["pooled_bins"] = g.pooled_bins;
    j["samples"] = g.samples;
    return j;
}

stability::ClassifyOptions classify_options(ExperimentConfig const& cfg)
{
    stability::ClassifyOptions o;
    o.horizon = cfg.effective_horizon();
    o.windows = cfg.windows;
    o.q_ceiling = cfg.q_ceiling;
    return o;
}

std::string fmt(double x)
{
    return report::format_double(x);
}

RunOutcome run_simulate(ExperimentConfig const& cfg, Writer& out)
{
    auto const params = cfg.model_params(cfg.alpha.values.front());
    SimulationOptions opts;
    opts.stride = cfg.stride;
    opts.q_ceiling = cfg.q_ceiling;
    RandomSource const src(cfg.seed, kTrajectory);
    progress("simulating " + std::to_string(cfg.effective_horizon()) + " slots");
    auto const traj = simulate(SystemState{}, params, cfg.effective_horizon(), src, opts);

    Table t{{"slot", "q", "v", "arrivals", "attempts", "success", "collision", "harvested"}, {}};
    for (auto const& r : traj.records)
    {
        t.add_row({static_cast<std::int64_t>(r.slot), r.state_after.q, r.state_after.v, r.arrivals,
                   r.attempts, r.success, r.collision, r.harvested});
    }
    out.table("trajectory", t);

    auto const& s = traj.summary;
    ordered_json j;
    j["command"] = "simulate";
    j["seed"] = cfg.seed;
    j["lambda"] = params.lambda;
    j["c"] = params.c;
    j["p"] = params.p;
    j["arrival_law"] = to_string(params.arrival);
    j["harvest_policy"] = cfg.harvest;
    j["slots"] = s.slots;
    j["final_q"] = s.final_state.q;
    j["final_v"] = s.final_state.v;
    j["mean_q"] = s.mean_q;
    j["mean_v"] = s.mean_v;
    j["max_q"] = s.max_q;
    j["arrivals"] = s.arrivals;
    j["successes"] = s.successes;
    j["collisions"] = s.collisions;
    j["harvested"] = s.harvested;
    j["throughput"] = s.slots ? static_cast<double>(s.successes) / static_cast<double>(s.slots)
                              : 0.0;
    out.emit("summary.json", j);

    return {out.take(), "command=simulate slots=" + std::to_string(s.slots) + " final_q="
                            + std::to_string(s.final_state.q) + " final_v="
                            + std::to_string(s.final_state.v) + " mean_q=" + fmt(s.mean_q)};
}

RunOutcome run_sweep(ExperimentConfig const& cfg, Writer& out)
{
    stability::SweepConfig sc;
    sc.lambdas = cfg.lambda.values;
    sc.cs = cfg.c.values;
    sc.p = cfg.p;
    sc.arrival = parse_arrival_law(cfg.arrival);
    sc.classify = classify_options(cfg);
    sc.margin = cfg.margin;
    sc.threads = cfg.effective_threads();
    progress("sweeping " + std::to_string(sc.lambdas.size() * sc.cs.size()) + " cells on "
             + std::to_string(sc.threads) + " threads");
    auto const table = stability::phase_sweep(sc, cfg.seed);

    Table t{{"lambda", "c", "p", "classification", "theoretical_sign", "slope", "slope_t",
             "return_freq", "seed"},
            {}};
    for (auto const& cell : table.cells)
    {
        t.add_row({cell.lambda, cell.c, cell.p, to_string(cell.classification),
                   to_string(cell.theory), cell.slope, cell.slope_t, cell.return_freq,
                   std::to_string(cell.seed)});
    }
    out.table("phase", t);

    bool const maximal = stability::extent_maximal_at(table, 1.0);
    ordered_json j;
    j["command"] = "sweep";
    j["seed"] = cfg.seed;
    j["cells"] = table.cells.size();
    j["scored"] = table.scored;
    j["agreed"] = table.agreed;
    j["agreement"] = table.agreement;
    j["margin"] = cfg.margin;
    ordered_json ext = ordered_json::array();
    for (auto const& e : table.extents)
    {
        ext.push_back({{"c", e.c}, {"lambda_max", e.lambda_max}});
    }
    j["stable_extents"] = ext;
    j["extent_maximal_at_c1"] = maximal;
    out.emit("sweep_report.json", j);

    return {out.take(), "command=sweep cells=" + std::to_string(table.cells.size())
                            + " agreement=" + fmt(table.agreement)
                            + " extent_max_at_c1=" + (maximal ? "true" : "false")};
}

RunOutcome run_aux_verify(ExperimentConfig const& cfg, Writer& out)
{
    auto const params = cfg.model_params(cfg.alpha.values.front());
    double const c = params.c;
    double const p = params.p;
    unsigned const threads = cfg.effective_threads();

    progress("long-run success rate");
    auto const rate = aux::empirical_success_rate(c, p, cfg.effective_horizon(), cfg.burn_in,
                                                  RandomSource(cfg.seed, kSuccessRate));

    Count const radius = cfg.radius >= 0 ? cfg.radius : stability::drift_radius(params);
    auto const lag_reps = cfg.replications_or(100'000);
    progress("convergence lag over initial values 0.." + std::to_string(radius));
    aux::LagOptions lo;
    lo.horizon_cap = cfg.lag_cap;
    lo.threads = threads;
    auto const lag = aux::convergence_lag(c, p, radius, cfg.delta, lag_reps,
                                          RandomSource(cfg.seed, kLag), lo);

    Table t{{"n", "initial_v", "estimated_success_prob", "tv_distance"}, {}};
    for (auto const& curve : lag.curves)
    {
        for (std::size_t n = 0; n < curve.success_prob.size(); ++n)
        {
            t.add_row({static_cast<std::int64_t>(n), *curve.start, curve.success_prob[n],
                       curve.tv_distance[n]});
        }
    }
    out.table("convergence", t);

    progress("stationarity checks");
    auto const gof_reps = cfg.replications_or(100'000);
    auto const bins = aux::stationary_support(c, p);
    auto const probs = stats::poisson_bins(c / p, bins);
    ordered_json stationarity = ordered_json::array();
    double min_p = 1.0;
    for (int n : {1, 10, 100})
    {
        auto const states
            = aux::sample_states(std::nullopt, c, p, n, gof_reps,
                                 RandomSource(cfg.seed, kStationaryGof).substream(n), threads);
        auto const g = stats::chi_square_gof(stats::histogram(states, bins), probs);
        min_p = std::min(min_p, g.p_value);
        auto row = gof_json(g);
        row["n"] = n;
        stationarity.push_back(row);
    }
    auto const erg = aux::ergodicity_from_curve(lag.curves.front(), c, p);

    ordered_json j;
    j["command"] = "aux-verify";
    j["seed"] = cfg.seed;
    j["c"] = c;
    j["p"] = p;
    j["success_prob_limit"] = aux::success_prob_limit(c);
    j["success_rate"] = {{"estimate", rate.estimate},
                         {"half_width", rate.half_width},
                         {"samples", rate.samples},
                         {"horizon", cfg.effective_horizon()},
                         {"burn_in", cfg.burn_in}};
    j["convergence_lag"] = {{"radius", radius},
                            {"delta", cfg.delta},
                            {"tolerance", lag.tolerance},
                            {"half_width", lag.half_width},
                            {"replications", lag_reps},
                            {"horizon_cap", cfg.lag_cap},
                            {"converged", lag.converged},
                            {"lag", lag.lag}};
    j["stationarity"] = stationarity;
    j["ergodicity"] = {{"final_tv", erg.final_tv},
                       {"noise_floor", erg.noise_floor},
                       {"log_tv_slope", erg.slope},
                       {"r_squared", erg.r_squared},
                       {"fitted_points", erg.fitted_points}};
    out.emit("aux_report.json", j);

    return {out.take(), "command=aux-verify success_rate=" + fmt(rate.estimate)
                            + " limit=" + fmt(aux::success_prob_limit(c))
                            + " lag=" + std::to_string(lag.lag) + " min_gof_p=" + fmt(min_p)};
}

RunOutcome run_lemma1_verify(ExperimentConfig const& cfg, Writer& out)
{
    namespace im = immigration;
    auto const params = cfg.model_params(cfg.alpha.values.front());
    double const c = params.c;
    double const p = params.p;
    Count const w0 = cfg.w0;
    auto const z = im::InputLaw::poisson(c);
    unsigned const threads = cfg.effective_threads();
    auto const horizon = cfg.effective_horizon();
    auto const reps = cfg.replications_or(10'000);

    progress("coupling tail");
    auto const tail = im::coupling_tail_fit(w0, p, std::max<std::uint64_t>(reps, 100'000),
                                            RandomSource(cfg.seed, kCouplingTail), {}, threads);
    Table t{{"n", "survival_estimate"}, {}};
    for (std::size_t n = 0; n < tail.survival.size(); ++n)
    {
        t.add_row({static_cast<std::int64_t>(n), tail.survival[n]});
    }
    out.table("coupling_tail", t);

    progress("mean bound");
    auto const mb = im::mean_bound_check(w0, z, p, horizon, reps,
                                         RandomSource(cfg.seed, kMeanBound), threads);

    progress("monotone domination");
    im::DominatedInput const small{.cap = std::max<Count>(1, static_cast<Count>(c)),
                                   .keep_prob = 0.5};
    auto const violations = im::monotone_couple_paths(
        w0, w0 / 2, z, small, p, horizon, reps, RandomSource(cfg.seed, kMonotone), threads);

    progress("stationary marginal");
    int const terms = im::truncation_for(z.mean(), p);
    auto const marginal = im::poisson_marginal_check(
        c, p, std::max<std::uint64_t>(reps, 100'000), terms, RandomSource(cfg.seed, kMarginal),
        threads);

    progress("forgetting of the initial value");
    int const forget_n = static_cast<int>(std::ceil(std::log(1e-3) / std::log1p(-p))) + 1;
    auto const bins = stats::poisson_support(c / p, 1e-9);
    std::vector<std::vector<Count>> rows;
    for (Count start : {Count{0}, w0})
    {
        auto const ws = im::sample_w(start, z, p, p < 1.0 ? forget_n : 1, reps,
                                     RandomSource(cfg.seed, kHomogeneity).substream(start),
                                     threads);
        rows.push_back(stats::histogram(ws, bins));
    }
    auto const homog = stats::chi_square_homogeneity(rows);

    ordered_json j;
    j["command"] = "lemma1-verify";
    j["seed"] = cfg.seed;
    j["w0"] = w0;
    j["p"] = p;
    j["input"] = z.describe();
    j["coupling_tail"] = {{"status", im::to_string(tail.status)},
                          {"rate", tail.rate},
                          {"reference_rate", std::log1p(-p)},
                          {"r_squared", tail.r_squared},
                          {"window", tail.window}};
    j["mean_bound"] = {{"bound", mb.bound},
                       {"terms", mb.terms},
                       {"pathwise_checks", mb.pathwise_checks},
                       {"pathwise_violations", mb.pathwise_violations},
                       {"mean_violations", mb.mean_violations},
                       {"worst_excess_se", mb.worst_excess_se},
                       {"replications", reps},
                       {"horizon", horizon}};
    j["monotone"] = {{"paths", reps},
                     {"horizon", horizon},
                     {"w0_small", w0 / 2},
                     {"cap", small.cap},
                     {"keep_prob", small.keep_prob},
                     {"violations", violations}};
    auto mj = gof_json(marginal.gof);
    mj["rate"] = marginal.rate;
    mj["sample_mean"] = marginal.sample_mean;
    mj["truncation_bias"] = marginal.truncation_bias;
    mj["terms"] = marginal.terms;
    j["poisson_marginal"] = mj;
    auto hj = gof_json(homog);
    hj["n"] = forget_n;
    hj["starts"] = {0, w0};
    j["initial_value_homogeneity"] = hj;
    out.emit("lemma1_report.json", j);

    return {out.take(), "command=lemma1-verify tail_rate=" + fmt(tail.rate)
                            + " pathwise_violations=" + std::to_string(mb.pathwise_violations)
                            + " monotone_violations=" + std::to_string(violations)
                            + " marginal_p=" + fmt(marginal.gof.p_value)};
}

RunOutcome run_drift(ExperimentConfig const& cfg, Writer& out)
{
    auto const params = cfg.model_params(cfg.alpha.values.front());
    stability::DriftSpec spec;
    spec.lyapunov = cfg.lyapunov == "q_only" ? stability::Lyapunov::q_only
                                             : stability::Lyapunov::q_plus_v;
    spec.start = SystemState{cfg.start_q, cfg.start_v};
    spec.horizon_k = cfg.k;
    spec.replications = cfg.replications_or(2'000);
    progress("drift over " + std::to_string(spec.replications) + " runs of "
             + std::to_string(spec.horizon_k) + " slots");
    auto const d = stability::estimate_drift(spec, params, RandomSource(cfg.seed, kDrift),
                                             cfg.effective_threads());
    double const exact = stability::one_step_drift(spec.start, params, spec.lyapunov);

    Table t{{"lambda", "c", "p", "lyapunov", "start_q", "start_v", "k", "mean_drift",
             "ci_half_width", "std_error", "replications", "excludes_zero"},
            {}};
    t.add_row({params.lambda, params.c, params.p, to_string(spec.lyapunov), spec.start.q,
               spec.start.v, static_cast<std::int64_t>(spec.horizon_k), d.mean_drift,
               d.ci_half_width, d.std_error, static_cast<std::int64_t>(d.replications),
               d.excludes_zero()});
    out.table("drift", t);

    ordered_json j;
    j["command"] = "drift";
    j["seed"] = cfg.seed;
    j["lambda"] = params.lambda;
    j["c"] = params.c;
    j["p"] = params.p;
    j["lyapunov"] = to_string(spec.lyapunov);
    j["start"] = {{"q", spec.start.q}, {"v", spec.start.v}};
    j["k"] = spec.horizon_k;
    j["replications"] = d.replications;
    j["mean_drift"] = d.mean_drift;
    j["per_slot_drift"] = d.mean_drift / spec.horizon_k;
    j["ci_half_width"] = d.ci_half_width;
    j["std_error"] = d.std_error;
    j["excludes_zero"] = d.excludes_zero();
    j["exact_one_step_drift"] = exact;
    j["drift_radius"] = stability::drift_radius(params);
    out.emit("drift_report.json", j);

    return {out.take(), "command=drift mean=" + fmt(d.mean_drift) + " half_width="
                            + fmt(d.ci_half_width) + " excludes_zero="
                            + (d.excludes_zero() ? "true" : "false")};
}

RunOutcome run_remark3(ExperimentConfig const& cfg, Writer& out)
{
    auto const& alphas = cfg.alpha.values;
    double const lambda = cfg.lambda.values.front();
    double const c = cfg.c.values.front();
    auto const opts = classify_options(cfg);
    std::vector<stability::StabilityResult> results(alphas.size());
    progress("classifying " + std::to_string(alphas.size()) + " power-law policies");
    parallel_for(alphas.size(), cfg.effective_threads(), [&](std::size_t i) {
        results[i] = stability::remark3_experiment(alphas[i], lambda, c, cfg.p, opts,
                                                   RandomSource(stability::cell_seed(cfg.seed, i)));
    });

    Table t{{"alpha", "lambda", "c", "p", "classification", "slope", "slope_t", "growth",
             "return_freq", "seed"},
            {}};
    std::string classes;
    for (std::size_t i = 0; i < alphas.size(); ++i)
    {
        auto const& r = results[i];
        t.add_row({alphas[i], lambda, c, cfg.p, to_string(r.classification), r.diagnostics.slope,
                   r.diagnostics.slope_t, r.diagnostics.growth, r.diagnostics.return_freq,
                   std::to_string(stability::cell_seed(cfg.seed, i))});
        classes += (i ? "," : "") + to_string(r.classification);
    }
    out.table("remark3", t);
    return {out.take(), "command=remark3 classifications=" + classes};
}

}  // namespace

RunOutcome run(ExperimentConfig const& cfg)
{
    cfg.validate();
    Writer out(cfg);
    switch (cfg.command)
    {
        case Command::simulate: return run_simulate(cfg, out);
        case Command::sweep: return run_sweep(cfg, out);
        case Command::aux_verify: return run_aux_verify(cfg, out);
        case Command::lemma1_verify: return run_lemma1_verify(cfg, out);
        case Command::drift: return run_drift(cfg, out);
        case Command::remark3: return run_remark3(cfg, out);
    }
    throw ConfigError("unknown command");
}

int main_entry(std::vector<std::string> const& args)
{
    ParsedArgs parsed;
    try
    {
        parsed = parse_args(args);
    }
    catch (ConfigError const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (std::invalid_argument const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    if (parsed.help)
    {
        std::cout << parsed.help_text;
        return 0;
    }
    auto const& cfg = parsed.config;
    if (parsed.dump_config)
    {
        report::write_json(*parsed.dump_config, to_json(cfg));
    }

    auto const t0 = std::chrono::steady_clock::now();
    try
    {
        auto const outcome = run(cfg);
        double const secs
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char buf[32];
        auto const end = std::to_chars(buf, buf + sizeof buf, secs, std::chars_format::fixed, 3).ptr;
        std::cout << outcome.summary << " seed=" << cfg.seed
                  << " wall_s=" << std::string_view(buf, end - buf) << '\n';
        return 0;
    }
    catch (ConfigError const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (CeilingExceeded const& e)
    {
        std::cerr << "aborted: " << e.what() << '\n';
        return 2;
    }
    catch (std::exception const& e)
    {
        std::cerr << "aborted: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace ehaloha::cli
