#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ehaloha/sampling.hpp"

namespace ehaloha::stats {

double poisson_pmf(Count j, double rate);
double binomial_pmf(Count j, Count k, double prob);

//! Poisson(rate) probabilities on 0..K-2 with the upper tail lumped into bin K-1.
std::vector<double> poisson_bins(double rate, std::size_t bins);

//! Smallest support size K such that the Poisson(rate) mass above K-1 is below tail.
std::size_t poisson_support(double rate, double tail);

//! Counts of values in 0..bins-1; values >= bins-1 land in the last bin.
std::vector<Count> histogram(std::span<Count const> values, std::size_t bins);

struct GofResult
{
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int pooled_bins = 0;
    Count samples = 0;
};

//! Pearson goodness-of-fit. Adjacent bins are pooled until each expected
//! count reaches min_expected; probabilities must sum to 1.
GofResult chi_square_gof(std::span<Count const> observed, std::span<double const> probs,
                         double min_expected = 5.0);

//! Pearson homogeneity test over rows of counts on a common support.
GofResult chi_square_homogeneity(std::vector<std::vector<Count>> const& rows,
                                 double min_expected = 5.0);

//! Upper tail of the chi-square law.
double chi_square_sf(double statistic, int dof);

//! Total variation between an empirical histogram and a reference law on the
//! same bins (both lumping their tails into the last bin).
double tv_distance(std::span<Count const> observed, std::span<double const> probs);

struct LinearFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_se = 0.0;
    //! slope / slope_se; +inf when the residuals vanish with positive slope.
    double t_stat = 0.0;
    std::size_t points = 0;
};

LinearFit linear_fit(std::span<double const> x, std::span<double const> y);

//! Welford accumulator.
class RunningStats
{
  public:
    void add(double x) noexcept
    {
        ++n_;
        double const d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    //! Chan's parallel combination; used to merge fixed-order chunks.
    void merge(RunningStats const& o) noexcept;

    std::int64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept;
    double std_error() const noexcept;
    double ci_half_width(double z = 1.959963984540054) const noexcept { return z * std_error(); }

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace ehaloha::stats
