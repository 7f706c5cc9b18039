#pragma once

#include <array>
#include <vector>

#include "refprice/market.hpp"
#include "refprice/trajectory.hpp"

namespace refprice {

/// Stable Nash equilibrium: both firms best-respond and the reference price
/// is stationary (r* = theta_1*p1* + theta_2*p2*). `interior` is true iff all
/// three components lie strictly inside the price box; the closed form is the
/// equilibrium only in that case.
struct Sne {
    double p1_star = 0.0;
    double p2_star = 0.0;
    double r_star = 0.0;
    bool interior = false;

    double price(Firm i) const { return i == Firm::one ? p1_star : p2_star; }
};

/// Closed-form solution of the first-order + stability system
///   2*beta_i*p_i = alpha_i + delta_i*p_{-i} + gamma_i*r   (i = 1,2)
///   r = theta_1*p1 + theta_2*p2.
/// Throws std::domain_error when the system denominator is not positive
/// (cannot happen under the m >= 2 regime, guarded regardless).
Sne sne_closed_form(const MarketParams& params);

/// Clamped unconstrained revenue maximizer given the rival price and the
/// reference price: project((alpha_i + delta_i*p_other + gamma_i*r)/(2*beta_i)).
double best_response(const MarketParams& params, Firm i, double p_other, double r);

/// Greatest fixed point of the joint best-response map at reference price r,
/// computed by monotone iteration downward from (p_hi, p_hi). The iterates
/// are componentwise nonincreasing; `trace`, when given, receives every
/// iterate including the starting point.
std::array<double, 2> largest_best_response_profile(
    const MarketParams& params, double r,
    std::vector<std::array<double, 2>>* trace = nullptr);

/// Dynamics of repeatedly posting the largest best-response profile and
/// letting the reference price adjust. The reference column is monotone
/// (direction set by the first step) and converges to an SNE.
Trajectory best_response_dynamics(const MarketParams& params, double r1, long horizon);

} // namespace refprice
