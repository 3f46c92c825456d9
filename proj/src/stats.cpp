#include "ehaloha/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace ehaloha::stats {

double poisson_pmf(Count j, double rate)
{
    if (j < 0)
    {
        return 0.0;
    }
    if (rate == 0.0)
    {
        return j == 0 ? 1.0 : 0.0;
    }
    auto const x = static_cast<double>(j);
    return std::exp(x * std::log(rate) - rate - std::lgamma(x + 1.0));
}

double binomial_pmf(Count j, Count k, double prob)
{
    if (j < 0 || j > k)
    {
        return 0.0;
    }
    if (prob == 0.0)
    {
        return j == 0 ? 1.0 : 0.0;
    }
    if (prob == 1.0)
    {
        return j == k ? 1.0 : 0.0;
    }
    auto const n = static_cast<double>(k);
    auto const x = static_cast<double>(j);
    double const log_choose = std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0);
    return std::exp(log_choose + x * std::log(prob) + (n - x) * std::log1p(-prob));
}

std::vector<double> poisson_bins(double rate, std::size_t bins)
{
    if (bins == 0)
    {
        throw std::invalid_argument("poisson_bins: need at least one bin");
    }
    std::vector<double> out(bins);
    double head = 0.0;
    for (std::size_t j = 0; j + 1 < bins; ++j)
    {
        out[j] = poisson_pmf(static_cast<Count>(j), rate);
        head += out[j];
    }
    // Upper tail from the regularized incomplete gamma avoids 1 - head cancellation.
    out[bins - 1] = bins == 1 ? 1.0
                              : boost::math::gamma_p(static_cast<double>(bins - 1), rate);
    return out;
}

std::size_t poisson_support(double rate, double tail)
{
    // k bins put P(X >= k - 1) in the last one.
    std::size_t k = 1;
    while (boost::math::gamma_p(static_cast<double>(k), rate) >= tail)
    {
        ++k;
    }
    return k + 1;
}

std::vector<Count> histogram(std::span<Count const> values, std::size_t bins)
{
    std::vector<Count> h(bins, 0);
    for (Count v : values)
    {
        auto const idx = std::min<std::size_t>(static_cast<std::size_t>(std::max<Count>(v, 0)),
                                               bins - 1);
        ++h[idx];
    }
    return h;
}

double chi_square_sf(double statistic, int dof)
{
    if (dof <= 0)
    {
        return 1.0;
    }
    if (statistic <= 0.0)
    {
        return 1.0;
    }
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

GofResult chi_square_gof(std::span<Count const> observed, std::span<double const> probs,
                         double min_expected)
{
    if (observed.size() != probs.size() || observed.empty())
    {
        throw std::invalid_argument("chi_square_gof: observed and probs must match and be non-empty");
    }
    Count const n = std::accumulate(observed.begin(), observed.end(), Count{0});
    GofResult res;
    res.samples = n;
    if (n == 0)
    {
        return res;
    }
    auto const total = static_cast<double>(n);

    std::vector<double> exp_groups;
    std::vector<double> obs_groups;
    double e_acc = 0.0;
    double o_acc = 0.0;
    for (std::size_t j = 0; j < observed.size(); ++j)
    {
        e_acc += probs[j] * total;
        o_acc += static_cast<double>(observed[j]);
        if (e_acc >= min_expected)
        {
            exp_groups.push_back(e_acc);
            obs_groups.push_back(o_acc);
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0)
    {
        if (exp_groups.empty())
        {
            exp_groups.push_back(e_acc);
            obs_groups.push_back(o_acc);
        }
        else
        {
            exp_groups.back() += e_acc;
            obs_groups.back() += o_acc;
        }
    }

    double stat = 0.0;
    for (std::size_t g = 0; g < exp_groups.size(); ++g)
    {
        double const d = obs_groups[g] - exp_groups[g];
        if (exp_groups[g] > 0.0)
        {
            stat += d * d / exp_groups[g];
        }
        else if (obs_groups[g] > 0.0)
        {
            stat = std::numeric_limits<double>::infinity();
        }
    }
    res.statistic = stat;
    res.pooled_bins = static_cast<int>(exp_groups.size());
    res.dof = res.pooled_bins - 1;
    res.p_value = chi_square_sf(stat, res.dof);
    return res;
}

GofResult chi_square_homogeneity(std::vector<std::vector<Count>> const& rows, double min_expected)
{
    if (rows.size() < 2)
    {
        throw std::invalid_argument("chi_square_homogeneity: need at least two rows");
    }
    std::size_t cols = 0;
    for (auto const& r : rows)
    {
        cols = std::max(cols, r.size());
    }
    std::vector<double> row_tot(rows.size(), 0.0);
    std::vector<double> col_tot(cols, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
        {
            row_tot[i] += static_cast<double>(rows[i][j]);
            col_tot[j] += static_cast<double>(rows[i][j]);
        }
    }
    double const total = std::accumulate(row_tot.begin(), row_tot.end(), 0.0);
    double const min_row = *std::min_element(row_tot.begin(), row_tot.end());
    GofResult res;
    res.samples = static_cast<Count>(total);
    if (min_row <= 0.0)
    {
        throw std::invalid_argument("chi_square_homogeneity: empty row");
    }
    double const col_needed = min_expected * total / min_row;

    // Pool adjacent columns so every cell's expected count reaches min_expected.
    std::vector<std::vector<double>> pooled;
    std::vector<double> acc(rows.size(), 0.0);
    double acc_tot = 0.0;
    for (std::size_t j = 0; j < cols; ++j)
    {
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            acc[i] += j < rows[i].size() ? static_cast<double>(rows[i][j]) : 0.0;
        }
        acc_tot += col_tot[j];
        if (acc_tot >= col_needed)
        {
            pooled.push_back(acc);
            std::fill(acc.begin(), acc.end(), 0.0);
            acc_tot = 0.0;
        }
    }
    if (acc_tot > 0.0)
    {
        if (pooled.empty())
        {
            pooled.push_back(acc);
        }
        else
        {
            for (std::size_t i = 0; i < rows.size(); ++i)
            {
                pooled.back()[i] += acc[i];
            }
        }
    }

    double stat = 0.0;
    for (auto const& col : pooled)
    {
        double const ct = std::accumulate(col.begin(), col.end(), 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            double const e = row_tot[i] * ct / total;
            double const d = col[i] - e;
            stat += d * d / e;
        }
    }
    res.statistic = stat;
    res.pooled_bins = static_cast<int>(pooled.size());
    res.dof = static_cast<int>((rows.size() - 1) * (pooled.size() - 1));
    res.p_value = chi_square_sf(stat, res.dof);
    return res;
}

double tv_distance(std::span<Count const> observed, std::span<double const> probs)
{
    if (observed.size() != probs.size())
    {
        throw std::invalid_argument("tv_distance: size mismatch");
    }
    auto const n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), Count{0}));
    if (n == 0.0)
    {
        return 1.0;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < observed.size(); ++j)
    {
        s += std::abs(static_cast<double>(observed[j]) / n - probs[j]);
    }
    return 0.5 * s;
}

LinearFit linear_fit(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size())
    {
        throw std::invalid_argument("linear_fit: size mismatch");
    }
    LinearFit fit;
    fit.points = x.size();
    if (x.size() < 2)
    {
        return fit;
    }
    auto const n = static_cast<double>(x.size());
    double const mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double const my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
    {
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double const sse = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (x.size() > 2)
    {
        fit.slope_se = std::sqrt(sse / (n - 2.0) / sxx);
        if (fit.slope_se > 0.0)
        {
            fit.t_stat = fit.slope / fit.slope_se;
        }
        else if (fit.slope != 0.0)
        {
            fit.t_stat = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
        }
    }
    return fit;
}

void RunningStats::merge(RunningStats const& o) noexcept
{
    if (o.n_ == 0)
    {
        return;
    }
    if (n_ == 0)
    {
        *this = o;
        return;
    }
    auto const na = static_cast<double>(n_);
    auto const nb = static_cast<double>(o.n_);
    double const d = o.mean_ - mean_;
    double const n = na + nb;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
}

double RunningStats::variance() const noexcept
{
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const noexcept
{
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

}  // namespace ehaloha::stats
