#include "refprice/equilibrium.hpp"

#include <cmath>
#include <stdexcept>

namespace refprice {

namespace {

constexpr double kFixpointTol = 1e-12;
constexpr long kFixpointMaxIter = 1000000;

} // namespace

Sne sne_closed_form(const MarketParams& params) {
    const double a1 = params.alpha(Firm::one), a2 = params.alpha(Firm::two);
    const double b1 = params.beta(Firm::one), b2 = params.beta(Firm::two);
    const double d1 = params.delta(Firm::one), d2 = params.delta(Firm::two);
    const double g1 = params.gamma(Firm::one), g2 = params.gamma(Firm::two);
    const double t1 = params.theta(Firm::one), t2 = params.theta(Firm::two);

    const double denom = (2.0 * b1 - t1 * g1) * (2.0 * b2 - t2 * g2) -
                         (t2 * g1 + d1) * (t1 * g2 + d2);
    if (denom <= 0.0)
        throw std::domain_error("sne_closed_form: singular first-order system (denominator <= 0)");

    Sne sne;
    sne.p1_star = (2.0 * a1 * b2 - a1 * t2 * g2 + a2 * (d1 + t2 * g1)) / denom;
    sne.p2_star = (2.0 * a2 * b1 - a2 * t1 * g1 + a1 * (d2 + t1 * g2)) / denom;
    sne.r_star = (t1 * (2.0 * a1 * b2 + a2 * d1) + t2 * (2.0 * a2 * b1 + a1 * d2)) / denom;
    sne.interior = sne.p1_star > params.p_lo() && sne.p1_star < params.p_hi() &&
                   sne.p2_star > params.p_lo() && sne.p2_star < params.p_hi() &&
                   sne.r_star > params.p_lo() && sne.r_star < params.p_hi();
    return sne;
}

double best_response(const MarketParams& params, Firm i, double p_other, double r) {
    if (!params.in_box(p_other) || !params.in_box(r))
        throw std::domain_error("best_response: inputs outside price box");
    const double unconstrained =
        (params.alpha(i) + params.delta(i) * p_other + params.gamma(i) * r) /
        (2.0 * params.beta(i));
    return project(params, unconstrained);
}

std::array<double, 2> largest_best_response_profile(
    const MarketParams& params, double r, std::vector<std::array<double, 2>>* trace) {
    if (!params.in_box(r))
        throw std::domain_error("largest_best_response_profile: r outside price box");

    // Tarski iteration from the top: the joint map is componentwise
    // nondecreasing, so iterates starting at (p_hi, p_hi) fall monotonically
    // onto the greatest fixed point.
    std::array<double, 2> p{params.p_hi(), params.p_hi()};
    if (trace) trace->push_back(p);
    for (long it = 0; it < kFixpointMaxIter; ++it) {
        const std::array<double, 2> next{best_response(params, Firm::one, p[1], r),
                                         best_response(params, Firm::two, p[0], r)};
        if (trace) trace->push_back(next);
        const double change =
            std::max(std::abs(next[0] - p[0]), std::abs(next[1] - p[1]));
        p = next;
        if (change < kFixpointTol) return p;
    }
    return p; // contraction guarantees we never get here with sane params
}

Trajectory best_response_dynamics(const MarketParams& params, double r1, long horizon) {
    if (!params.in_box(r1))
        throw std::domain_error("best_response_dynamics: r1 outside price box");
    if (horizon < 1)
        throw std::invalid_argument("best_response_dynamics: horizon must be >= 1");

    Trajectory traj(params);
    traj.reserve(static_cast<std::size_t>(horizon));
    traj.sched1_desc = traj.sched2_desc = "best-response";
    traj.schedn_desc = "reference-update";

    double r = r1;
    for (long t = 1; t <= horizon; ++t) {
        const auto p = largest_best_response_profile(params, r);
        traj.push_period(p[0], p[1], r, p[0], p[1]);
        r = reference_update(params, r, p[0], p[1]);
    }
    return traj;
}

} // namespace refprice
