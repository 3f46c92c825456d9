#include "ehaloha/sampling.hpp"

#include <cfloat>

namespace ehaloha {

namespace {

constexpr double kInversionMeanLimit = 16.0;
constexpr double kPoissonInversionLimit = 30.0;

philox::Key make_key(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t const k = mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ull));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

// Sequential-search inversion of the Binomial(k, prob) cdf; prob <= 0.5 and
// k*prob small, so the search runs O(mean) steps.
Count binomial_inversion(double u, Count k, double prob)
{
    double const ratio = prob / (1.0 - prob);
    double pmf = std::exp(static_cast<double>(k) * std::log1p(-prob));
    double cdf = pmf;
    Count j = 0;
    while (u > cdf && j < k)
    {
        pmf *= ratio * static_cast<double>(k - j) / static_cast<double>(j + 1);
        ++j;
        cdf += pmf;
        if (pmf < DBL_MIN)
        {
            break;
        }
    }
    return j;
}

}  // namespace

std::string to_string(Family f)
{
    switch (f)
    {
        case Family::transmit: return "transmit";
        case Family::harvest: return "harvest";
        case Family::arrival: return "arrival";
        case Family::aux: return "aux";
    }
    return "unknown";
}

RandomSource::RandomSource(std::uint64_t master_seed, std::uint64_t stream_id)
    : seed_(master_seed), stream_(stream_id), key_(make_key(master_seed, stream_id))
{
}

RandomSource RandomSource::substream(std::uint64_t child) const
{
    RandomSource out(seed_, mix64(stream_ ^ mix64(child ^ 0xD1B54A32D192ED03ull)));
    out.threshold_ = threshold_;
    return out;
}

Count aggregated_binomial(RandomSource::Engine& engine, Count k, double prob)
{
    if (prob > 0.5)
    {
        return k - aggregated_binomial(engine, k, 1.0 - prob);
    }
    if (static_cast<double>(k) * prob <= kInversionMeanLimit)
    {
        return binomial_inversion(engine.unit(), k, prob);
    }
    std::binomial_distribution<Count> dist(k, prob);
    return dist(engine);
}

Count poisson_inversion(double u, double rate)
{
    double pmf = std::exp(-rate);
    double cdf = pmf;
    Count j = 0;
    while (u > cdf)
    {
        ++j;
        pmf *= rate / static_cast<double>(j);
        cdf += pmf;
        if (pmf < DBL_MIN)
        {
            break;
        }
    }
    return j;
}

Count poisson(RandomSource const& src, Slot slot, double rate, Family family)
{
    if (!(rate >= 0.0) || !std::isfinite(rate))
    {
        throw std::invalid_argument("poisson: rate must be finite and non-negative");
    }
    if (rate == 0.0)
    {
        return 0;
    }
    if (rate <= kPoissonInversionLimit)
    {
        return poisson_inversion(src.uniform(slot, 1, family), rate);
    }
    auto eng = src.engine(slot, family);
    std::poisson_distribution<Count> dist(rate);
    return dist(eng);
}

}  // namespace ehaloha
