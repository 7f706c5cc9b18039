#pragma once

#include <array>
#include <string>

#include "refprice/market.hpp"

namespace refprice {

/// Player index for the feasibility quadratics: the two firms and nature.
enum class Player { firm1, firm2, nature };

/// Feasibility quadratic f_{i,m}(z) for constant steps eps_i = z*sigma_i*(1-a)/beta_i.
/// For a firm:  (4*sigma_i + 2*sigma_{-i}/m^2) z^2
///              - ((2 - 1/(2m))*sigma_i - sigma_{-i}/(2m)) z + 3/4
/// For nature:  (2/m^2)(sigma_1+sigma_2) z^2 + (1/(2m))(sigma_1+sigma_2) z - 1/4
/// The multiplier region for player i is { z > 0 : f_{i,m}(z) < 0 }.
double f_im(double sigma1, double sigma2, double m, Player i, double z);

/// Strong-convexity threshold above which the equal-sigma multiplier region
/// (z1, z2) is nonempty:
///   sigma0(m) = max{ 6(2m^2+1)/(2m-1)^2, (2m^2+7)^2/(8m^3-36m+8) }.
/// Defined for m > 2 (the second denominator vanishes at m = 2); smaller m
/// is an out-of-regime domain error.
double sigma0(double m);

/// Constant-step feasibility report.
///
/// Equal sigmas take the closed-form route: z1 is the smaller root of the
/// firm quadratic, z2 the larger root of the nature quadratic, s_tilde the
/// unique intersection of the normalized quadratics h_1 = f_1/(2*sigma) and
/// h_n = f_n inside (z1, z2), and H their common value there, in [-1/4, 0).
/// Unequal sigmas intersect the three negativity intervals numerically; no
/// intersection certificate exists on that route, so s_tilde defaults to the
/// region midpoint and H is NaN.
struct ConstStepReport {
    double sigma0 = 0.0;  // threshold for the given m (NaN when m <= 2)
    double z1 = 0.0;      // region lower endpoint (dimensionless multiplier)
    double z2 = 0.0;      // region upper endpoint
    double s_tilde = 0.0; // certified multiplier
    double H = 0.0;       // common normalized quadratic value at s_tilde
    bool feasible = false;
    std::array<double, 2> recommended_eps{0.0, 0.0}; // s_tilde*sigma_i*(1-a)/beta_i
    std::string reason;   // why infeasible, empty otherwise
};

ConstStepReport const_step_region(const MarketParams& params, double sigma1, double sigma2);

/// Per-firm admissible band for decreasing steps at period t (t >= 0 indexes
/// the 1/(t+1) decay):
///   10/((4*beta_i - delta_i)(t+1)) <= eps_{i,t} <= 2/(max{delta_i,gamma_i}(t+1)).
/// Nonempty for every t when m >= 2; requires m >= 2.
struct ScheduleBand {
    double lower = 0.0;
    double upper = 0.0;
};
std::array<ScheduleBand, 2> decreasing_step_band(const MarketParams& params, long t);

/// Constants certifying the c/t decay of the squared price distance under
/// band schedules and quadratic regularizers R(z) = z^2.
///
///   rho_a   = ceil(a/(1-a)) + 1
///   t_a     = ceil( (a/(1-a))(rho_a+1) / (rho_a - a/(1-a)) )
///   u       = (1-a) * max{theta} * sum_{tau=1}^{rho_a+t_a-1} a^{-tau}/tau
///   t_theta = first period after which (rho_a+1)*log(t-rho_a-1)/t stays
///             below theta_bar/max{theta} - 1 for all later t
///   t_tilde = first period after max{rho_a+t_a, t_theta} from which
///             (t-rho_a)*(2*W^2 + u*(2t*W^2+c2+1)/(1-theta_bar)) < a^{-t}
///             holds for all later t, W = p_hi - p_lo
///   c       = (2*t_tilde*W^2 + c2 + 1)/(1-theta_bar)
///
/// c2 bounds the squared-gradient term 4*g^2/(sigma_i*max{delta_i,gamma_i}^2)
/// over the box, with a 1% margin to keep the strict inequality.
struct RateConstantReport {
    long rho_a = 0;
    long t_a = 0;
    long t_theta = 0;
    long t_tilde = 0;
    double u = 0.0;
    double c2 = 0.0;
    double c = 0.0;
    double theta_bar = 0.0;
};

/// theta_bar must lie in (max{theta}, 1). Throws std::domain_error otherwise
/// and std::runtime_error when the t_tilde scan exceeds horizon_guard (the
/// exponential eventually dominates, but a close to 1 pushes the crossing
/// arbitrarily far out).
RateConstantReport rate_constant(const MarketParams& params, double theta_bar,
                                 long horizon_guard = 1000000);

/// Geometric certificate for the squared price distance under the constant
/// steps eps_i = s_tilde*sigma*(1-a)/beta_i with quadratic scale-sigma maps:
///   ((1+2*sigma)/sigma) * (p_hi-p_lo)^2 * ((1+a)/2)^t.
double geometric_rate_bound(const MarketParams& params, double sigma, long t);

} // namespace refprice
