#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "refprice/equilibrium.hpp"
#include "refprice/omd.hpp"
#include "refprice/trajectory.hpp"

namespace refprice {

/// Bregman divergence D(x, y) = R(x) - R(y) - R'(y)(x - y). Nonnegative, and
/// at least (sigma/2)(x-y)^2 for a sigma-strongly-convex map.
double bregman(const Regularizer& reg, double x, double y);

/// Squared distances to the equilibrium per period: prices and reference
/// price separately.
struct DistanceSeries {
    std::vector<double> x;   // |p* - p_t|^2 over both firms
    std::vector<double> x_n; // (r* - r_t)^2
};

/// Throws std::domain_error when the given Sne is inconsistent with the
/// trajectory's market (stationarity/first-order residuals too large).
DistanceSeries dist_to_sne(const Trajectory& traj, const Sne& sne);

struct DiagnosticsOptions {
    double tol = 1e-6;      // per-component successive change
    long window = 50;       // trailing periods examined
    double osc_tol = 1e-3;  // amplitude threshold for oscillation
    double sne_tol = 1e-2;  // per-component closeness to the SNE
};

struct ConvergenceVerdict {
    bool converged = false;
    std::optional<long> t_converged;
    std::optional<PriceState> limit_point;
    bool at_sne = false;
    bool oscillating = false;
    std::optional<double> rate_slope;
    std::vector<std::pair<std::string, long>> bound_violations;
};

/// Converged iff every per-component successive change over the trailing
/// window is below tol; oscillating iff not converged and some component's
/// amplitude over the window exceeds osc_tol. at_sne compares the final
/// state against the closed-form equilibrium.
ConvergenceVerdict detect_convergence(const Trajectory& traj,
                                      const DiagnosticsOptions& opts = {});

/// Pointwise check series_t <= bound(t) over recorded periods (1-based t).
struct BoundCheck {
    bool holds = true;
    std::optional<long> first_violation;
};
BoundCheck check_rate_bound(const std::vector<double>& series,
                            const std::function<double(long)>& bound);

/// Runs check_rate_bound and records a violation, if any, on the verdict.
BoundCheck record_bound_check(ConvergenceVerdict& verdict, const std::string& name,
                              const std::vector<double>& series,
                              const std::function<double(long)>& bound);

enum class RateModel { power, geometric };

/// Least-squares slope of log(series_t) against log(t) (power) or t
/// (geometric) over [first, last] (1-based, inclusive). Nonpositive values
/// in the range are a domain error.
double fit_rate(const std::vector<double>& series, RateModel model, long first, long last);

/// Fit over the trailing half of the series.
double fit_rate(const std::vector<double>& series, RateModel model);

} // namespace refprice
