#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "ehaloha/philox.hpp"

namespace ehaloha {

using Count = std::int64_t;
using Slot = std::uint64_t;

//! Which mechanism a uniform drives. Chains sharing a RandomSource agree on
//! this mapping, so the same address always feeds the same mechanism.
enum class Family : std::uint8_t
{
    transmit = 0,  //!< transmission / departure indicators
    harvest = 1,   //!< energy harvesting indicators
    arrival = 2,   //!< exogenous arrivals and W-chain input
    aux = 3,       //!< auxiliary-chain input and secondary thinning
};

std::string to_string(Family f);

//! Whether a binomial draw must be realized element by element.
//!
//! `pathwise` always sums indicators over the addressed uniforms, which keeps
//! prefix-monotone coupling between chains. `aggregate` lets the sampler
//! replace the sum by a single distributional draw once k exceeds the source's
//! aggregate threshold.
enum class Coupling
{
    pathwise,
    aggregate,
};

//! Addressing options for count samplers.
struct Draw
{
    Family family = Family::transmit;
    Coupling coupling = Coupling::pathwise;
    //! Indicators use uniform indices offset+1 .. offset+k.
    std::uint64_t offset = 0;
};

//! Anything that maps (slot, index, family) to a uniform in (0,1).
template<class S>
concept UniformSource = requires(S const& s, Slot n, std::uint64_t i, Family f) {
    { s.uniform(n, i, f) } -> std::convertible_to<double>;
};

//---------------------------------------------------------------------------//
/*!
 * Stateless, address-keyed source of uniforms.
 *
 * The value at (slot, index, family) depends only on the master seed, the
 * stream id and the address. Two sources with the same seed and stream are
 * interchangeable, and draws may be requested in any order from any thread.
 */
class RandomSource
{
  public:
    static constexpr Count kDefaultAggregateThreshold = 64;
    static constexpr std::uint64_t kMaxIndex = (std::uint64_t{1} << 48) - 1;

    explicit RandomSource(std::uint64_t master_seed, std::uint64_t stream_id = 0);

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    //! Independent child stream, e.g. one per replication or sweep cell.
    RandomSource substream(std::uint64_t child) const;

    Count aggregate_threshold() const noexcept { return threshold_; }
    void set_aggregate_threshold(Count k) noexcept { threshold_ = k; }

    //! Uniform in (0,1). Index starts at 1.
    double uniform(Slot slot, std::uint64_t index, Family family) const noexcept
    {
        std::uint64_t const idx = index - 1;
        auto const out = block(slot, idx >> 1, family, 0);
        std::uint64_t const word
            = (idx & 1) ? (std::uint64_t{out[2]} << 32 | out[3])
                        : (std::uint64_t{out[0]} << 32 | out[1]);
        return to_unit(word);
    }

    //! Raw 128-bit block; lane 0 backs uniform(), lane 1 backs engine().
    philox::Counter
    block(Slot slot, std::uint64_t block_index, Family family, std::uint32_t lane) const noexcept
    {
        philox::Counter ctr{static_cast<std::uint32_t>(slot),
                            static_cast<std::uint32_t>(slot >> 32),
                            static_cast<std::uint32_t>(block_index),
                            static_cast<std::uint32_t>((block_index >> 32) & 0xFFFFu)
                                | (static_cast<std::uint32_t>(family) << 16) | (lane << 24)};
        return philox::generate(ctr, key_);
    }

    static double to_unit(std::uint64_t word) noexcept
    {
        return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
    }

    //! Uniform random bit generator over a private lane of one address.
    //! Used by aggregated samplers that need a variable number of draws.
    class Engine
    {
      public:
        using result_type = std::uint64_t;
        static constexpr result_type min() { return 0; }
        static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

        Engine(RandomSource const& src, Slot slot, Family family)
            : src_(&src), slot_(slot), family_(family)
        {
        }

        result_type operator()() noexcept
        {
            if (half_ == 0)
            {
                buf_ = src_->block(slot_, counter_++, family_, 1);
            }
            std::uint64_t const word = half_ == 0 ? (std::uint64_t{buf_[0]} << 32 | buf_[1])
                                                  : (std::uint64_t{buf_[2]} << 32 | buf_[3]);
            half_ ^= 1;
            return word;
        }

        double unit() noexcept { return to_unit((*this)()); }

      private:
        RandomSource const* src_;
        Slot slot_;
        Family family_;
        std::uint64_t counter_ = 0;
        int half_ = 0;
        philox::Counter buf_{};
    };

    Engine engine(Slot slot, Family family) const { return Engine(*this, slot, family); }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    philox::Key key_;
    Count threshold_ = kDefaultAggregateThreshold;
};

namespace detail {

inline void check_prob(double prob, char const* what)
{
    if (!(prob >= 0.0 && prob <= 1.0))
    {
        throw std::invalid_argument(std::string(what) + ": probability must lie in [0,1], got "
                                    + std::to_string(prob));
    }
}

inline void check_count(Count k, std::uint64_t offset)
{
    if (k < 0)
    {
        throw std::invalid_argument("negative element count");
    }
    if (static_cast<std::uint64_t>(k) + offset > RandomSource::kMaxIndex)
    {
        throw std::out_of_range("indicator index exceeds the addressable range");
    }
}

}  // namespace detail

//! Binomial(k, prob) drawn from one engine; used above the aggregate threshold.
Count aggregated_binomial(RandomSource::Engine& engine, Count k, double prob);

//! Poisson(rate) by inversion of a single uniform; exact for rate <= 30.
Count poisson_inversion(double u, double rate);

//---------------------------------------------------------------------------//
/*!
 * Number of indices i in 1..k with U(slot, offset+i) < prob.
 *
 * Under Coupling::aggregate and k above the source's threshold the count is
 * drawn from the same law without touching the per-index uniforms.
 */
template<UniformSource S>
Count binomial(S const& src, Slot slot, Count k, double prob, Draw draw = {})
{
    detail::check_prob(prob, "binomial");
    detail::check_count(k, draw.offset);
    if (k == 0 || prob == 0.0)
    {
        return 0;
    }
    if (prob == 1.0)
    {
        return k;
    }
    if constexpr (std::same_as<S, RandomSource>)
    {
        if (draw.coupling == Coupling::aggregate && k > src.aggregate_threshold())
        {
            auto eng = src.engine(slot, draw.family);
            return aggregated_binomial(eng, k, prob);
        }
    }
    Count hits = 0;
    for (Count i = 1; i <= k; ++i)
    {
        hits += src.uniform(slot, draw.offset + static_cast<std::uint64_t>(i), draw.family) < prob;
    }
    return hits;
}

//! Survivors of k elements each kept with survive_prob; pathwise k - binomial(k, 1 - s).
template<UniformSource S>
Count thin(S const& src, Slot slot, Count k, double survive_prob, Draw draw = {})
{
    detail::check_prob(survive_prob, "thin");
    return k - binomial(src, slot, k, 1.0 - survive_prob, draw);
}

//! Thinning iterated over slots first_slot .. first_slot+steps-1.
//! Marginally Binomial(k, survive_prob^steps).
template<UniformSource S>
Count compose_thin(S const& src, Slot first_slot, Count k, double survive_prob, int steps,
                   Draw draw = {})
{
    if (steps < 1)
    {
        throw std::invalid_argument("compose_thin: steps must be >= 1");
    }
    detail::check_prob(survive_prob, "compose_thin");
    for (int s = 0; s < steps && k > 0; ++s)
    {
        k = thin(src, first_slot + static_cast<Slot>(s), k, survive_prob, draw);
    }
    return k;
}

//! Poisson(rate) count at the address (slot, 1, family).
Count poisson(RandomSource const& src, Slot slot, double rate, Family family = Family::arrival);

}  // namespace ehaloha
