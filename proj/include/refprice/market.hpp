#pragma once

#include <array>
#include <cstddef>
#include <optional>

namespace refprice {

/// Firm index for the two real firms. Nature (the reference-price player)
/// is addressed separately where it matters.
enum class Firm : int { one = 0, two = 1 };

inline constexpr Firm other(Firm i) {
    return i == Firm::one ? Firm::two : Firm::one;
}

/// Demand and reference-update parameters for the two-firm market.
///
/// Demand of firm i:   d_i = alpha_i - beta_i*p_i + delta_i*p_other + gamma_i*r
/// Reference update:   r'  = a*r + (1-a)*(theta_1*p_1 + theta_2*p_2)
///
/// Construction validates every invariant; instances are immutable afterwards.
/// The sensitivity margin m satisfies beta_i >= m*(delta_i + gamma_i) for both
/// firms; when not supplied it is derived as the largest such value.
class MarketParams {
public:
    /// Throws std::invalid_argument naming the offending field when any
    /// invariant fails. `m` may be supplied explicitly only if it is positive
    /// and no larger than the derived margin.
    MarketParams(std::array<double, 2> alpha, std::array<double, 2> beta,
                 std::array<double, 2> delta, std::array<double, 2> gamma,
                 std::array<double, 2> theta, double a, double p_lo, double p_hi,
                 std::optional<double> m = std::nullopt);

    double alpha(Firm i) const { return alpha_[idx(i)]; }
    double beta(Firm i) const { return beta_[idx(i)]; }
    double delta(Firm i) const { return delta_[idx(i)]; }
    double gamma(Firm i) const { return gamma_[idx(i)]; }
    double theta(Firm i) const { return theta_[idx(i)]; }
    double a() const { return a_; }
    double p_lo() const { return p_lo_; }
    double p_hi() const { return p_hi_; }
    double m() const { return m_; }

    double box_width() const { return p_hi_ - p_lo_; }
    double theta_max() const { return theta_[0] > theta_[1] ? theta_[0] : theta_[1]; }
    bool in_box(double x) const { return x >= p_lo_ && x <= p_hi_; }

    static std::size_t idx(Firm i) { return static_cast<std::size_t>(i); }

private:
    std::array<double, 2> alpha_, beta_, delta_, gamma_, theta_;
    double a_, p_lo_, p_hi_, m_;
};

/// One period of market state. Prices and the reference price live in the box.
struct PriceState {
    double p1 = 0.0;
    double p2 = 0.0;
    double r = 0.0;
    long t = 1;
};

/// Linear demand of firm i. Out-of-box inputs are a domain error; clamping is
/// the business of project() alone.
double demand(const MarketParams& params, Firm i, double p_i, double p_other, double r);

/// Single-period revenue p_i * d_i.
double revenue(const MarketParams& params, Firm i, double p1, double p2, double r);

/// First-order oracle: derivative of the cost -revenue w.r.t. own price,
///   g_i = 2*beta_i*p_i - (alpha_i + delta_i*p_other + gamma_i*r).
double gradient(const MarketParams& params, Firm i, double p1, double p2, double r);

/// Nature's gradient r - (theta_1*p1 + theta_2*p2); zero exactly at the
/// stability condition.
double nature_gradient(const MarketParams& params, double p1, double p2, double r);

/// Exponential-smoothing reference update, a convex combination of r and the
/// visibility-weighted price average.
double reference_update(const MarketParams& params, double r, double p1, double p2);

/// Clamp onto the price interval [p_lo, p_hi].
double project(const MarketParams& params, double x);

/// Demand rewritten through the perceived surcharge/discount r - p_i:
///   alpha_i - (beta_i - gamma_i)*p_i + delta_i*p_other + gamma_i*(r - p_i).
/// Identical to demand() up to floating rounding.
double surcharge_form_demand(const MarketParams& params, Firm i, double p_i,
                             double p_other, double r);

} // namespace refprice
