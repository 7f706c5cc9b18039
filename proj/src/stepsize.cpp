#include "refprice/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace refprice {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Smallest positive natural >= x.
long ceil_pos(double x) {
    const long c = static_cast<long>(std::ceil(x));
    return c < 1 ? 1 : c;
}

struct Quadratic {
    double a2, a1, a0;
    double operator()(double z) const { return (a2 * z + a1) * z + a0; }
};

Quadratic firm_quadratic(double sigma_own, double sigma_other, double m) {
    return {4.0 * sigma_own + 2.0 * sigma_other / (m * m),
            -((2.0 - 1.0 / (2.0 * m)) * sigma_own - sigma_other / (2.0 * m)),
            0.75};
}

Quadratic nature_quadratic(double sigma1, double sigma2, double m) {
    const double s = sigma1 + sigma2;
    return {2.0 * s / (m * m), s / (2.0 * m), -0.25};
}

// Real roots in increasing order; empty when the discriminant is negative.
// Stable form: the smaller-magnitude root comes from Vieta.
int quadratic_roots(const Quadratic& q, double& lo, double& hi) {
    const double disc = q.a1 * q.a1 - 4.0 * q.a2 * q.a0;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    const double qterm = -0.5 * (q.a1 + (q.a1 >= 0.0 ? sq : -sq));
    double r1 = qterm / q.a2;
    double r2 = (qterm != 0.0) ? q.a0 / qterm : -q.a1 / q.a2 - r1;
    if (r1 > r2) std::swap(r1, r2);
    lo = r1;
    hi = r2;
    return disc == 0.0 ? 1 : 2;
}

} // namespace

double f_im(double sigma1, double sigma2, double m, Player i, double z) {
    if (!(m > 0.0)) throw std::invalid_argument("f_im: m must be > 0");
    if (!(sigma1 > 0.0 && sigma2 > 0.0))
        throw std::invalid_argument("f_im: sigmas must be > 0");
    switch (i) {
    case Player::firm1:
        return firm_quadratic(sigma1, sigma2, m)(z);
    case Player::firm2:
        return firm_quadratic(sigma2, sigma1, m)(z);
    case Player::nature:
        return nature_quadratic(sigma1, sigma2, m)(z);
    }
    throw std::logic_error("f_im: bad player");
}

double sigma0(double m) {
    if (!(m > 2.0))
        throw std::domain_error("sigma0: requires sensitivity margin m > 2");
    const double first = 6.0 * (2.0 * m * m + 1.0) / ((2.0 * m - 1.0) * (2.0 * m - 1.0));
    const double second_num = (2.0 * m * m + 7.0) * (2.0 * m * m + 7.0);
    const double second_den = 8.0 * m * m * m - 36.0 * m + 8.0;
    return std::max(first, second_num / second_den);
}

ConstStepReport const_step_region(const MarketParams& params, double sigma1, double sigma2) {
    if (!(sigma1 > 0.0 && sigma2 > 0.0))
        throw std::invalid_argument("const_step_region: sigmas must be > 0");
    const double m = params.m();
    const double one_minus_a = 1.0 - params.a();

    ConstStepReport rep;
    rep.sigma0 = m > 2.0 ? sigma0(m) : kNaN;
    rep.s_tilde = kNaN;
    rep.H = kNaN;

    const auto finish_infeasible = [&](const std::string& why) {
        rep.feasible = false;
        rep.reason = why;
        return rep;
    };

    if (sigma1 == sigma2) {
        const double sigma = sigma1;
        // Closed-form endpoints: smaller root of the firm quadratic,
        //   z1 = (1/sigma) * (3/4) / (1 - 1/(2m) + sqrt((1-1/(2m))^2 - (3/(2 sigma))(2+1/m^2)))
        // larger root of the nature quadratic,
        //   z2 = (1/sigma) * (1/2) / (1/m + sqrt(1/m^2 + 4/(sigma m^2))).
        const double half_m = 1.0 - 1.0 / (2.0 * m);
        const double disc1 = half_m * half_m - (3.0 / (2.0 * sigma)) * (2.0 + 1.0 / (m * m));
        if (disc1 <= 0.0)
            return finish_infeasible("firm quadratic has no two distinct roots (sigma too small)");
        rep.z1 = (0.75 / (half_m + std::sqrt(disc1))) / sigma;
        const double discn = 1.0 / (m * m) + 4.0 / (sigma * m * m);
        rep.z2 = (0.5 / (1.0 / m + std::sqrt(discn))) / sigma;
        if (!(rep.z1 < rep.z2))
            return finish_infeasible("region endpoints cross (z1 >= z2; sigma <= sigma0)");

        // Unique intersection of h1 = f1/(2 sigma) and hn = fn in (z1, z2);
        // their difference is itself a quadratic in z.
        const Quadratic f1 = firm_quadratic(sigma, sigma, m);
        const Quadratic fn = nature_quadratic(sigma, sigma, m);
        const Quadratic diff{f1.a2 / (2.0 * sigma) - fn.a2, f1.a1 / (2.0 * sigma) - fn.a1,
                             f1.a0 / (2.0 * sigma) - fn.a0};
        double rlo, rhi;
        const int n = quadratic_roots(diff, rlo, rhi);
        double s = kNaN;
        for (double cand : {rlo, rhi}) {
            if (n > 0 && cand > rep.z1 && cand < rep.z2) {
                s = cand;
                break;
            }
        }
        if (!std::isfinite(s))
            return finish_infeasible("normalized quadratics do not intersect inside (z1, z2)");
        rep.s_tilde = s;
        rep.H = f1(s) / (2.0 * sigma);
        if (!(rep.H >= -0.25 && rep.H < 0.0))
            return finish_infeasible("intersection value H outside [-1/4, 0)");
    } else {
        // Unequal sigmas: intersect the three negativity intervals numerically.
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        const Quadratic f1 = firm_quadratic(sigma1, sigma2, m);
        const Quadratic f2 = firm_quadratic(sigma2, sigma1, m);
        const Quadratic fn = nature_quadratic(sigma1, sigma2, m);
        for (const auto& q : {f1, f2, fn}) {
            double rlo, rhi;
            if (quadratic_roots(q, rlo, rhi) < 2)
                return finish_infeasible("a feasibility quadratic has no negativity interval");
            lo = std::max(lo, rlo);
            hi = std::min(hi, rhi);
        }
        if (!(lo < hi))
            return finish_infeasible("negativity intervals have empty intersection");
        rep.z1 = lo;
        rep.z2 = hi;
        rep.s_tilde = 0.5 * (lo + hi); // no closed-form certificate on this route
    }

    // The report stands only if the multiplier region actually is negative
    // for every player at the certified point and at the midpoint.
    const double mid = 0.5 * (rep.z1 + rep.z2);
    for (Player pl : {Player::firm1, Player::firm2, Player::nature}) {
        if (!(f_im(sigma1, sigma2, m, pl, rep.s_tilde) < 0.0) ||
            !(f_im(sigma1, sigma2, m, pl, mid) < 0.0))
            return finish_infeasible("feasibility quadratic nonnegative inside reported region");
    }

    rep.feasible = true;
    rep.recommended_eps[0] = rep.s_tilde * sigma1 * one_minus_a / params.beta(Firm::one);
    rep.recommended_eps[1] = rep.s_tilde * sigma2 * one_minus_a / params.beta(Firm::two);
    return rep;
}

std::array<ScheduleBand, 2> decreasing_step_band(const MarketParams& params, long t) {
    if (params.m() < 2.0)
        throw std::domain_error("decreasing_step_band: requires sensitivity margin m >= 2");
    if (t < 0) throw std::invalid_argument("decreasing_step_band: t must be >= 0");
    std::array<ScheduleBand, 2> band;
    const double tp1 = static_cast<double>(t) + 1.0;
    for (Firm i : {Firm::one, Firm::two}) {
        const auto k = MarketParams::idx(i);
        band[k].lower = 10.0 / ((4.0 * params.beta(i) - params.delta(i)) * tp1);
        band[k].upper = 2.0 / (std::max(params.delta(i), params.gamma(i)) * tp1);
    }
    return band;
}

RateConstantReport rate_constant(const MarketParams& params, double theta_bar,
                                 long horizon_guard) {
    const double theta_max = params.theta_max();
    if (!(theta_bar > theta_max && theta_bar < 1.0))
        throw std::domain_error("rate_constant: theta_bar must lie in (max{theta}, 1)");

    const double a = params.a();
    const double q = a / (1.0 - a);
    const double width2 = params.box_width() * params.box_width();

    RateConstantReport rep;
    rep.theta_bar = theta_bar;
    rep.rho_a = ceil_pos(q) + 1;
    rep.t_a = ceil_pos(q * (static_cast<double>(rep.rho_a) + 1.0) /
                       (static_cast<double>(rep.rho_a) - q));

    double sum = 0.0;
    for (long tau = 1; tau <= rep.rho_a + rep.t_a - 1; ++tau)
        sum += std::pow(a, static_cast<double>(-tau)) / static_cast<double>(tau);
    rep.u = (1.0 - a) * theta_max * sum;

    // Gradient bound over the box: g_i is affine, so its extrema sit at the
    // corners. Quadratic regularizers R(z) = z^2 fix sigma_i = 2 here.
    const double sigma_i = 2.0;
    double c2 = 0.0;
    for (Firm i : {Firm::one, Firm::two}) {
        const double g_hi = 2.0 * params.beta(i) * params.p_hi() - params.alpha(i) -
                            (params.delta(i) + params.gamma(i)) * params.p_lo();
        const double g_lo = params.alpha(i) + (params.delta(i) + params.gamma(i)) * params.p_hi() -
                            2.0 * params.beta(i) * params.p_lo();
        const double g_max = std::max(g_hi, g_lo);
        const double dg = std::max(params.delta(i), params.gamma(i));
        c2 = std::max(c2, 4.0 * g_max * g_max / (sigma_i * dg * dg));
    }
    rep.c2 = 1.01 * c2;

    // t_theta: the log expression rises to a single interior maximum and then
    // falls; take the first period past the last violation, confirmed over a
    // 1000-step tail.
    const double theta_ratio = theta_bar / theta_max - 1.0;
    const auto log_expr = [&](long t) {
        return (static_cast<double>(rep.rho_a) + 1.0) *
               std::log(static_cast<double>(t - rep.rho_a - 1)) / static_cast<double>(t);
    };
    long t_theta = rep.rho_a + 3;
    {
        long last_violation = 0;
        double prev = -std::numeric_limits<double>::infinity();
        bool falling = false;
        for (long t = rep.rho_a + 3;; ++t) {
            if (t > horizon_guard)
                throw std::runtime_error("rate_constant: t_theta scan exceeded horizon_guard");
            const double v = log_expr(t);
            if (v > theta_ratio) last_violation = t;
            if (v < prev) falling = true;
            prev = v;
            if (falling && v <= theta_ratio) {
                bool tail_ok = true;
                for (long s = t + 1; s <= t + 1000; ++s) {
                    if (log_expr(s) > theta_ratio) {
                        tail_ok = false;
                        last_violation = s;
                        t = s;
                        break;
                    }
                }
                if (tail_ok) break;
            }
        }
        t_theta = std::max(last_violation + 1, rep.rho_a + 3);
    }
    rep.t_theta = t_theta;

    // t_tilde: quadratic-in-t left side versus exponential right side, in log
    // space to dodge overflow. After the first crossing the ratio is
    // monotone, which the tail check confirms.
    const double log_a_inv = -std::log(a);
    const auto log_lhs = [&](long t) {
        const double td = static_cast<double>(t);
        const double inner =
            2.0 * width2 + rep.u * (2.0 * td * width2 + rep.c2 + 1.0) / (1.0 - theta_bar);
        return std::log(td - static_cast<double>(rep.rho_a)) + std::log(inner);
    };
    const long scan_start = std::max(rep.rho_a + rep.t_a, rep.t_theta) + 1;
    long t_tilde = -1;
    for (long tau = scan_start; tau <= horizon_guard; ++tau) {
        if (log_lhs(tau) >= static_cast<double>(tau) * log_a_inv) continue;
        bool ok = true;
        double prev_margin = static_cast<double>(tau) * log_a_inv - log_lhs(tau);
        for (long s = tau + 1; s <= tau + 10 * rep.rho_a; ++s) {
            const double margin = static_cast<double>(s) * log_a_inv - log_lhs(s);
            if (margin <= 0.0 || margin < prev_margin) {
                ok = false;
                break;
            }
            prev_margin = margin;
        }
        if (ok) {
            t_tilde = tau;
            break;
        }
    }
    if (t_tilde < 0)
        throw std::runtime_error("rate_constant: t_tilde scan exceeded horizon_guard");
    rep.t_tilde = t_tilde;
    rep.c = (2.0 * static_cast<double>(t_tilde) * width2 + rep.c2 + 1.0) / (1.0 - theta_bar);
    return rep;
}

double geometric_rate_bound(const MarketParams& params, double sigma, long t) {
    if (!(sigma > 0.0)) throw std::invalid_argument("geometric_rate_bound: sigma must be > 0");
    if (t < 0) throw std::invalid_argument("geometric_rate_bound: t must be >= 0");
    const double width2 = params.box_width() * params.box_width();
    return (1.0 + 2.0 * sigma) / sigma * width2 *
           std::pow((1.0 + params.a()) / 2.0, static_cast<double>(t));
}

} // namespace refprice
