#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ehaloha/sampling.hpp"
#include "ehaloha/stats.hpp"

// Binomial-thinning process with immigration, W' = Binomial(W, 1-p) + Z,
// and the coupling machinery around it.
namespace ehaloha::immigration {

struct PoissonInput
{
    double rate = 1.0;
};
struct BernoulliInput
{
    double prob = 0.5;
};
struct DeterministicInput
{
    Count value = 0;
};
struct MixtureComponent
{
    double weight = 1.0;
    std::variant<PoissonInput, BernoulliInput, DeterministicInput> law;
};
struct MixtureInput
{
    std::vector<MixtureComponent> components;
};

//! Law of the i.i.d. non-negative integer input Z_n.
class InputLaw
{
  public:
    using Kind = std::variant<PoissonInput, BernoulliInput, DeterministicInput, MixtureInput>;

    InputLaw() = default;
    explicit InputLaw(Kind kind);

    static InputLaw poisson(double rate) { return InputLaw(PoissonInput{rate}); }
    static InputLaw bernoulli(double prob) { return InputLaw(BernoulliInput{prob}); }
    static InputLaw deterministic(Count value) { return InputLaw(DeterministicInput{value}); }

    double mean() const noexcept { return mean_; }
    Kind const& kind() const noexcept { return kind_; }
    std::string describe() const;

    //! Z at `slot`, from the arrival family (index 1; index 2 picks a mixture component).
    Count sample(RandomSource const& src, Slot slot) const;

  private:
    Kind kind_ = DeterministicInput{0};
    double mean_ = 0.0;
};

struct WChainState
{
    Count w = 0;
    //! Survivors among the original W_0 elements; they occupy the indicator prefix.
    Count tagged_initial = 0;

    friend bool operator==(WChainState const&, WChainState const&) = default;
};

//! Thin w and the tagged prefix with one shared transmit family, then add `input`.
WChainState thin_and_add(WChainState state, double p, Count input, RandomSource const& src,
                         Slot slot);

//! One step with a fresh Z draw.
WChainState step_w(WChainState state, double p, InputLaw const& z, RandomSource const& src,
                   Slot slot);

//! Smallest J with (1-p)^J E Z / p < tol.
int truncation_for(double input_mean, double p, double tol = 1e-9);

//! (1-p)^J E Z / p
double truncation_bias(double input_mean, double p, int terms);

//---------------------------------------------------------------------------//
/*!
 * Stationary solution at time n from the series
 *
 *   W(n) = Z_{n-1} + sum_{j=1..J} Dcomp_j(Z_{n-j-1}),
 *
 * where cohort j is thinned over slots n-j-1 .. n-2. Each cohort draws its
 * indicators from a disjoint index band so cohorts stay independent.
 * Requires n >= J + 1.
 */
Count stationary_sample(InputLaw const& z, double p, int terms, RandomSource const& src, Slot n);

//! Independent stationary samples; replication r uses src.substream(r) at n = J + 1.
std::vector<Count> stationary_samples(InputLaw const& z, double p, int terms,
                                      std::size_t replications, RandomSource const& src,
                                      unsigned threads = 1);

//! Values of W_n from W_0 = w0 over independent replications.
std::vector<Count> sample_w(Count w0, InputLaw const& z, double p, int n, std::size_t replications,
                            RandomSource const& src, unsigned threads = 1);

//! Number of steps until all w0 initial elements have been thinned away.
Count coupling_time(Count w0, double p, RandomSource const& src);

enum class FitStatus
{
    ok,
    degenerate,         //!< T <= 1 almost surely (p = 1)
    insufficient_data,  //!< fewer than two survival points inside the window
};

std::string to_string(FitStatus s);

struct TailWindow
{
    double lo = 1e-3;
    double hi = 0.5;
};

struct CouplingTail
{
    FitStatus status = FitStatus::insufficient_data;
    double rate = 0.0;  //!< slope of log P(T > n) in n
    double r_squared = 0.0;
    std::vector<double> survival;  //!< P(T > n), n = 0, 1, ...
    std::vector<int> window;       //!< n values used in the fit
};

CouplingTail coupling_tail_fit(Count w0, double p, std::size_t replications,
                               RandomSource const& src, TailWindow window = {},
                               unsigned threads = 1);

//! Pathwise-dominated input: Z~ = min(Binomial(Z, keep_prob), cap), drawn from Z itself.
struct DominatedInput
{
    Count cap = std::numeric_limits<Count>::max();
    double keep_prob = 1.0;

    Count apply(Count z, RandomSource const& src, Slot slot) const;
};

//! Run W and W~ on shared uniforms; count slots n in 0..horizon with W~_n > W_n.
Count monotone_couple(Count w0, Count w0_small, InputLaw const& z, DominatedInput const& z_small,
                      double p, Slot horizon, RandomSource const& src);

//! Sum of monotone_couple violations over independent paths.
Count monotone_couple_paths(Count w0, Count w0_small, InputLaw const& z,
                            DominatedInput const& z_small, double p, Slot horizon,
                            std::size_t paths, RandomSource const& src, unsigned threads = 1);

struct MeanBoundReport
{
    double bound = 0.0;  //!< w0 + E Z / p
    int terms = 0;       //!< burn-in length of the stationary companion
    Count pathwise_checks = 0;
    Count pathwise_violations = 0;  //!< W_n > w0 + W(n)
    int mean_violations = 0;        //!< n with mean(W_n) > bound + 3 se
    double worst_excess_se = 0.0;   //!< max over n of (mean - bound) / se
    std::vector<double> means;
    std::vector<double> std_errors;
};

//! Pathwise W_n <= w0 + W(n) against a stationary companion driven by the same
//! uniforms and inputs, plus the bound E W_n <= w0 + E Z / p.
MeanBoundReport mean_bound_check(Count w0, InputLaw const& z, double p, Slot horizon,
                                 std::size_t replications, RandomSource const& src,
                                 unsigned threads = 1);

struct MarginalReport
{
    stats::GofResult gof;
    double rate = 0.0;  //!< c / p
    double sample_mean = 0.0;
    double truncation_bias = 0.0;
    int terms = 0;
};

//! Stationary samples under Z ~ Poisson(c) tested against Poisson(c/p).
MarginalReport poisson_marginal_check(double c, double p, std::size_t replications, int terms,
                                      RandomSource const& src, unsigned threads = 1);

}  // namespace ehaloha::immigration
