#include "ehaloha/immigration.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "ehaloha/aux_chain.hpp"
#include "ehaloha/parallel.hpp"

namespace ehaloha::immigration {

namespace {

// Cohort j of the stationary series reads indices (j << kCohortShift) + 1 ...
constexpr unsigned kCohortShift = 24;

void check_p(double p)
{
    if (!(p > 0.0 && p <= 1.0))
    {
        throw std::invalid_argument("thinning chain: p must lie in (0,1]");
    }
}

struct SimpleSampler
{
    RandomSource const& src;
    Slot slot;
    Count operator()(PoissonInput const& in) const
    {
        return poisson(src, slot, in.rate, Family::arrival);
    }
    Count operator()(BernoulliInput const& in) const
    {
        return src.uniform(slot, 1, Family::arrival) < in.prob ? 1 : 0;
    }
    Count operator()(DeterministicInput const& in) const { return in.value; }
};

double simple_mean(std::variant<PoissonInput, BernoulliInput, DeterministicInput> const& law)
{
    return std::visit(
        [](auto const& in) -> double {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, PoissonInput>)
            {
                if (!(in.rate >= 0.0))
                {
                    throw std::invalid_argument("Poisson input rate must be non-negative");
                }
                return in.rate;
            }
            else if constexpr (std::is_same_v<T, BernoulliInput>)
            {
                detail::check_prob(in.prob, "Bernoulli input");
                return in.prob;
            }
            else
            {
                if (in.value < 0)
                {
                    throw std::invalid_argument("deterministic input must be non-negative");
                }
                return static_cast<double>(in.value);
            }
        },
        law);
}

template<class Body>
void for_each_replication(std::size_t reps, unsigned threads, Body&& body)
{
    parallel_for(chunk_count(reps), threads, [&](std::size_t chunk) {
        std::size_t const lo = chunk * kReplicationChunk;
        std::size_t const hi = std::min(reps, lo + kReplicationChunk);
        for (std::size_t r = lo; r < hi; ++r)
        {
            body(chunk, r);
        }
    });
}

}  // namespace

InputLaw::InputLaw(Kind kind) : kind_(std::move(kind))
{
    if (auto const* mix = std::get_if<MixtureInput>(&kind_))
    {
        if (mix->components.empty())
        {
            throw std::invalid_argument("mixture input needs at least one component");
        }
        double total = 0.0;
        double m = 0.0;
        for (auto const& comp : mix->components)
        {
            if (!(comp.weight >= 0.0))
            {
                throw std::invalid_argument("mixture weights must be non-negative");
            }
            total += comp.weight;
            m += comp.weight * simple_mean(comp.law);
        }
        if (!(total > 0.0))
        {
            throw std::invalid_argument("mixture weights must not all vanish");
        }
        mean_ = m / total;
    }
    else
    {
        mean_ = std::visit(
            [](auto const& in) -> double {
                using T = std::decay_t<decltype(in)>;
                if constexpr (std::is_same_v<T, MixtureInput>)
                {
                    return 0.0;
                }
                else
                {
                    return simple_mean(in);
                }
            },
            kind_);
    }
}

std::string InputLaw::describe() const
{
    std::ostringstream os;
    std::visit(
        [&](auto const& in) {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, PoissonInput>)
            {
                os << "poisson(" << in.rate << ")";
            }
            else if constexpr (std::is_same_v<T, BernoulliInput>)
            {
                os << "bernoulli(" << in.prob << ")";
            }
            else if constexpr (std::is_same_v<T, DeterministicInput>)
            {
                os << "deterministic(" << in.value << ")";
            }
            else
            {
                os << "mixture[" << in.components.size() << "]";
            }
        },
        kind_);
    return os.str();
}

Count InputLaw::sample(RandomSource const& src, Slot slot) const
{
    if (auto const* mix = std::get_if<MixtureInput>(&kind_))
    {
        double total = 0.0;
        for (auto const& comp : mix->components)
        {
            total += comp.weight;
        }
        double const u = src.uniform(slot, 2, Family::arrival) * total;
        double acc = 0.0;
        for (auto const& comp : mix->components)
        {
            acc += comp.weight;
            if (u < acc)
            {
                return std::visit(SimpleSampler{src, slot}, comp.law);
            }
        }
        return std::visit(SimpleSampler{src, slot}, mix->components.back().law);
    }
    return std::visit(
        [&](auto const& in) -> Count {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, MixtureInput>)
            {
                return 0;
            }
            else
            {
                return SimpleSampler{src, slot}(in);
            }
        },
        kind_);
}

WChainState thin_and_add(WChainState state, double p, Count input, RandomSource const& src,
                         Slot slot)
{
    Count const gone = binomial(src, slot, state.w, p, {.family = Family::transmit});
    Count const tagged_gone = binomial(src, slot, state.tagged_initial, p, {.family = Family::transmit});
    return {state.w - gone + input, state.tagged_initial - tagged_gone};
}

WChainState step_w(WChainState state, double p, InputLaw const& z, RandomSource const& src,
                   Slot slot)
{
    check_p(p);
    return thin_and_add(state, p, z.sample(src, slot), src, slot);
}

int truncation_for(double input_mean, double p, double tol)
{
    check_p(p);
    int j = 1;
    while (truncation_bias(input_mean, p, j) >= tol)
    {
        ++j;
    }
    return j;
}

double truncation_bias(double input_mean, double p, int terms)
{
    return std::pow(1.0 - p, terms) * input_mean / p;
}

Count stationary_sample(InputLaw const& z, double p, int terms, RandomSource const& src, Slot n)
{
    check_p(p);
    if (terms < 1)
    {
        throw std::invalid_argument("stationary_sample: need at least one term");
    }
    if (n < static_cast<Slot>(terms) + 1)
    {
        throw std::invalid_argument("stationary_sample: time index must be at least J + 1");
    }
    Count total = z.sample(src, n - 1);
    for (int j = 1; j <= terms; ++j)
    {
        Slot const born = n - static_cast<Slot>(j) - 1;
        Count const cohort = z.sample(src, born);
        if (cohort >= (Count{1} << kCohortShift))
        {
            throw std::out_of_range("stationary_sample: cohort exceeds its index band");
        }
        total += compose_thin(src, born, cohort, 1.0 - p, j,
                              {.family = Family::transmit,
                               .offset = static_cast<std::uint64_t>(j) << kCohortShift});
    }
    return total;
}

std::vector<Count> stationary_samples(InputLaw const& z, double p, int terms,
                                      std::size_t replications, RandomSource const& src,
                                      unsigned threads)
{
    std::vector<Count> out(replications);
    for_each_replication(replications, threads, [&](std::size_t, std::size_t r) {
        out[r] = stationary_sample(z, p, terms, src.substream(r), static_cast<Slot>(terms) + 1);
    });
    return out;
}

std::vector<Count> sample_w(Count w0, InputLaw const& z, double p, int n, std::size_t replications,
                            RandomSource const& src, unsigned threads)
{
    check_p(p);
    std::vector<Count> out(replications);
    for_each_replication(replications, threads, [&](std::size_t, std::size_t r) {
        auto const sub = src.substream(r);
        WChainState st{w0, w0};
        for (int k = 0; k < n; ++k)
        {
            st = step_w(st, p, z, sub, static_cast<Slot>(k));
        }
        out[r] = st.w;
    });
    return out;
}

Count coupling_time(Count w0, double p, RandomSource const& src)
{
    check_p(p);
    if (w0 < 0)
    {
        throw std::invalid_argument("coupling_time: w0 must be non-negative");
    }
    Count alive = w0;
    Count t = 0;
    while (alive > 0)
    {
        alive = thin(src, static_cast<Slot>(t), alive, 1.0 - p, {.family = Family::transmit});
        ++t;
    }
    return t;
}

std::string to_string(FitStatus s)
{
    switch (s)
    {
        case FitStatus::ok: return "ok";
        case FitStatus::degenerate: return "degenerate";
        case FitStatus::insufficient_data: return "insufficient_data";
    }
    return "unknown";
}

CouplingTail coupling_tail_fit(Count w0, double p, std::size_t replications,
                               RandomSource const& src, TailWindow window, unsigned threads)
{
    check_p(p);
    if (replications == 0)
    {
        throw std::invalid_argument("coupling_tail_fit: need replications");
    }
    std::vector<Count> times(replications);
    for_each_replication(replications, threads, [&](std::size_t, std::size_t r) {
        times[r] = coupling_time(w0, p, src.substream(r));
    });
    Count const t_max = *std::max_element(times.begin(), times.end());

    // survival[n] = P(T > n)
    std::vector<Count> exceed(static_cast<std::size_t>(t_max) + 1, 0);
    for (Count t : times)
    {
        for (Count n = 0; n < t; ++n)
        {
            ++exceed[static_cast<std::size_t>(n)];
        }
    }
    CouplingTail out;
    out.survival.resize(exceed.size());
    for (std::size_t n = 0; n < exceed.size(); ++n)
    {
        out.survival[n] = static_cast<double>(exceed[n]) / static_cast<double>(replications);
    }
    if (t_max <= 1)
    {
        out.status = FitStatus::degenerate;
        return out;
    }

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n = 0; n < out.survival.size(); ++n)
    {
        double const s = out.survival[n];
        if (s >= window.lo && s <= window.hi)
        {
            out.window.push_back(static_cast<int>(n));
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(s));
        }
    }
    if (xs.size() < 2)
    {
        out.status = FitStatus::insufficient_data;
        return out;
    }
    auto const fit = stats::linear_fit(xs, ys);
    out.status = FitStatus::ok;
    out.rate = fit.slope;
    out.r_squared = fit.r_squared;
    return out;
}

Count DominatedInput::apply(Count z, RandomSource const& src, Slot slot) const
{
    Count kept = keep_prob < 1.0 ? binomial(src, slot, z, keep_prob, {.family = Family::aux}) : z;
    return std::min(kept, cap);
}

Count monotone_couple(Count w0, Count w0_small, InputLaw const& z, DominatedInput const& z_small,
                      double p, Slot horizon, RandomSource const& src)
{
    check_p(p);
    if (w0_small > w0 || w0_small < 0)
    {
        throw std::invalid_argument("monotone_couple: need 0 <= w0_small <= w0");
    }
    WChainState big{w0, 0};
    WChainState small{w0_small, 0};
    Count violations = 0;
    for (Slot n = 0; n < horizon; ++n)
    {
        Count const input = z.sample(src, n);
        Count const input_small = z_small.apply(input, src, n);
        big = thin_and_add(big, p, input, src, n);
        small = thin_and_add(small, p, input_small, src, n);
        violations += small.w > big.w;
    }
    return violations;
}

Count monotone_couple_paths(Count w0, Count w0_small, InputLaw const& z,
                            DominatedInput const& z_small, double p, Slot horizon,
                            std::size_t paths, RandomSource const& src, unsigned threads)
{
    std::vector<Count> per_path(paths, 0);
    for_each_replication(paths, threads, [&](std::size_t, std::size_t r) {
        per_path[r] = monotone_couple(w0, w0_small, z, z_small, p, horizon, src.substream(r));
    });
    Count total = 0;
    for (Count v : per_path)
    {
        total += v;
    }
    return total;
}

MeanBoundReport mean_bound_check(Count w0, InputLaw const& z, double p, Slot horizon,
                                 std::size_t replications, RandomSource const& src,
                                 unsigned threads)
{
    check_p(p);
    MeanBoundReport rep;
    rep.bound = static_cast<double>(w0) + z.mean() / p;
    rep.terms = truncation_for(z.mean(), p);
    auto const warmup = static_cast<Slot>(rep.terms);
    auto const points = static_cast<std::size_t>(horizon) + 1;

    std::size_t const chunks = chunk_count(replications);
    std::vector<std::vector<stats::RunningStats>> partial(chunks,
                                                          std::vector<stats::RunningStats>(points));
    std::vector<Count> violations(chunks, 0);

    for_each_replication(replications, threads, [&](std::size_t chunk, std::size_t r) {
        auto const sub = src.substream(r);
        // Stationary companion: started empty far enough in the past.
        WChainState companion{};
        for (Slot s = 0; s < warmup; ++s)
        {
            companion = step_w(companion, p, z, sub, s);
        }
        WChainState chain{w0, w0};
        auto& acc = partial[chunk];
        for (std::size_t n = 0; n < points; ++n)
        {
            acc[n].add(static_cast<double>(chain.w));
            violations[chunk] += chain.w > w0 + companion.w;
            if (n + 1 < points)
            {
                Slot const slot = warmup + n;
                Count const input = z.sample(sub, slot);
                chain = thin_and_add(chain, p, input, sub, slot);
                companion = thin_and_add(companion, p, input, sub, slot);
            }
        }
    });

    std::vector<stats::RunningStats> total(points);
    for (std::size_t c = 0; c < chunks; ++c)
    {
        for (std::size_t n = 0; n < points; ++n)
        {
            total[n].merge(partial[c][n]);
        }
        rep.pathwise_violations += violations[c];
    }
    rep.pathwise_checks = static_cast<Count>(replications * points);
    rep.worst_excess_se = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < points; ++n)
    {
        double const m = total[n].mean();
        double const se = total[n].std_error();
        rep.means.push_back(m);
        rep.std_errors.push_back(se);
        if (m > rep.bound + 3.0 * se)
        {
            ++rep.mean_violations;
        }
        if (se > 0.0)
        {
            rep.worst_excess_se = std::max(rep.worst_excess_se, (m - rep.bound) / se);
        }
    }
    return rep;
}

MarginalReport poisson_marginal_check(double c, double p, std::size_t replications, int terms,
                                      RandomSource const& src, unsigned threads)
{
    if (replications < 100000)
    {
        throw std::invalid_argument("poisson_marginal_check: needs at least 1e5 replications");
    }
    MarginalReport rep;
    rep.rate = c / p;
    rep.terms = terms;
    rep.truncation_bias = truncation_bias(c, p, terms);
    auto const samples = stationary_samples(InputLaw::poisson(c), p, terms, replications, src, threads);
    double sum = 0.0;
    for (Count v : samples)
    {
        sum += static_cast<double>(v);
    }
    rep.sample_mean = sum / static_cast<double>(replications);
    auto const bins = aux::stationary_support(c, p);
    auto const hist = stats::histogram(samples, bins);
    auto const probs = stats::poisson_bins(rep.rate, bins);
    rep.gof = stats::chi_square_gof(hist, probs);
    return rep;
}

}  // namespace ehaloha::immigration
