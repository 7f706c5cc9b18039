#pragma once

#include <functional>
#include <string>
#include <vector>

#include "refprice/market.hpp"
#include "refprice/trajectory.hpp"

namespace refprice {

/// Mirror map: a strongly convex function R with derivative R', its inverse
/// (R')^{-1}, and the strong-convexity modulus sigma = inf R''. The proxy
/// update solves R'(y) = R'(p) - eps*g through inverse_derivative.
struct Regularizer {
    enum class Kind { quadratic, custom };

    Kind kind = Kind::quadratic;
    double scale = 1.0; // meaningful for quadratic only
    double sigma = 1.0;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::function<double(double)> inverse_derivative;

    /// R(z) = scale*z^2/2, R'(z) = scale*z, (R')^{-1}(v) = v/scale, sigma = scale.
    static Regularizer quadratic(double scale);

    /// Arbitrary differentiable strongly convex map. The caller vouches that
    /// `inv` inverts `der`; mirror_step fails with a configuration error if
    /// it detectably does not.
    static Regularizer custom(std::function<double(double)> value,
                              std::function<double(double)> der,
                              std::function<double(double)> inv, double sigma);
};

/// Step-size sequence eps_t, t = 1, 2, ...
struct StepSchedule {
    enum class Kind { constant, power, table };
    enum class Tri { yes, no, unknown };

    Kind kind = Kind::constant;
    double c = 0.0;      // constant value, or power numerator
    double eta = 0.0;    // power exponent (> 0)
    double offset = 0.0; // power: eps_t = c/(t+offset)^eta
    std::vector<double> values; // table entries, eps_1..eps_n

    static StepSchedule constant(double c);
    static StepSchedule power(double c, double eta, double offset = 0.0);
    static StepSchedule table(std::vector<double> values);

    double value(long t) const; // t >= 1
    std::string describe() const;
};

struct ScheduleClass {
    StepSchedule::Tri sum_diverges = StepSchedule::Tri::unknown;
    StepSchedule::Tri sum_sq_converges = StepSchedule::Tri::unknown;
    StepSchedule::Tri limit_zero = StepSchedule::Tri::unknown;
    std::string label;
};

/// Classifies a schedule against the decreasing-step convergence conditions:
/// divergent step sum with convergent squared sum (and vanishing steps) is
/// the SNE-convergent class; a summable sequence may converge off the SNE;
/// a non-vanishing sequence is outside the class entirely.
ScheduleClass classify_schedule(const StepSchedule& sched);

/// One proxy update: returns y with R'(y) = R'(p) - eps*g. A zero step or a
/// zero gradient returns p unchanged. Throws std::runtime_error if the
/// configured inverse fails to invert the derivative.
double mirror_step(const Regularizer& reg, double p, double eps, double g);

/// Initial state of the mirror-descent loop when no explicit prices are
/// given: each proxy starts at argmin of its regularizer over the box.
PriceState initial_state_argmin(const MarketParams& params, const Regularizer& reg1,
                                const Regularizer& reg2, double r1);

/// Two-firm mirror-descent pricing under reference-price updates. Each
/// period: project both proxies, read both gradients from the same state,
/// update both proxies, then update the reference price. Initial proxies are
/// the init prices themselves (use initial_state_argmin for the argmin
/// convention). Deterministic: identical inputs give identical trajectories.
Trajectory simulate(const MarketParams& params, const Regularizer& reg1,
                    const Regularizer& reg2, const StepSchedule& sched1,
                    const StepSchedule& sched2, const PriceState& init, long horizon);

/// Three-player form of the same game: the reference price is a third
/// mirror-descent player. With the default nature configuration (quadratic
/// scale 1, constant step 1-a) its proxy update coincides bit-exactly with
/// the reference update, so the (p1, p2, r) columns reproduce simulate().
Trajectory simulate_induced(const MarketParams& params, const Regularizer& reg1,
                            const Regularizer& reg2, const Regularizer& reg_n,
                            const StepSchedule& sched1, const StepSchedule& sched2,
                            const StepSchedule& sched_n, const PriceState& init,
                            long horizon);

/// Nature defaults of the induced game.
Regularizer default_nature_regularizer();
StepSchedule default_nature_schedule(const MarketParams& params);

} // namespace refprice
