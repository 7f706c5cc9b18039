#include "refprice/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace refprice {

double bregman(const Regularizer& reg, double x, double y) {
    return reg.value(x) - reg.value(y) - reg.derivative(y) * (x - y);
}

DistanceSeries dist_to_sne(const Trajectory& traj, const Sne& sne) {
    const MarketParams& params = traj.params;
    // Consistency gate: the equilibrium must belong to this market.
    if (!params.in_box(sne.p1_star) || !params.in_box(sne.p2_star) ||
        !params.in_box(sne.r_star))
        throw std::domain_error("dist_to_sne: SNE outside this market's price box");
    if (sne.interior) {
        const double stat = std::abs(nature_gradient(params, sne.p1_star, sne.p2_star, sne.r_star));
        const double foc1 = std::abs(gradient(params, Firm::one, sne.p1_star, sne.p2_star, sne.r_star));
        const double foc2 = std::abs(gradient(params, Firm::two, sne.p1_star, sne.p2_star, sne.r_star));
        if (stat > 1e-6 || foc1 > 1e-6 || foc2 > 1e-6)
            throw std::domain_error("dist_to_sne: SNE does not satisfy this market's equilibrium conditions");
    }

    DistanceSeries out;
    out.x.reserve(traj.size());
    out.x_n.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double e1 = sne.p1_star - traj.p1[k];
        const double e2 = sne.p2_star - traj.p2[k];
        const double en = sne.r_star - traj.r[k];
        out.x.push_back(e1 * e1 + e2 * e2);
        out.x_n.push_back(en * en);
    }
    return out;
}

ConvergenceVerdict detect_convergence(const Trajectory& traj, const DiagnosticsOptions& opts) {
    if (opts.window < 2)
        throw std::invalid_argument("detect_convergence: window must be >= 2");
    const long n = static_cast<long>(traj.size());
    if (n < opts.window)
        throw std::domain_error("detect_convergence: trajectory shorter than window");

    const std::vector<double>* cols[3] = {&traj.p1, &traj.p2, &traj.r};

    ConvergenceVerdict verdict;
    double max_change = 0.0;
    for (long k = n - opts.window; k < n - 1; ++k)
        for (const auto* col : cols)
            max_change = std::max(max_change, std::abs((*col)[k + 1] - (*col)[k]));
    verdict.converged = max_change < opts.tol;

    if (verdict.converged) {
        // First period from which every later successive change stays below tol.
        long t_conv = 1;
        for (long k = n - 2; k >= 0; --k) {
            bool quiet = true;
            for (const auto* col : cols)
                quiet = quiet && std::abs((*col)[k + 1] - (*col)[k]) < opts.tol;
            if (!quiet) {
                t_conv = k + 2;
                break;
            }
        }
        verdict.t_converged = t_conv;
    }

    PriceState limit;
    limit.p1 = traj.p1.back();
    limit.p2 = traj.p2.back();
    limit.r = traj.r.back();
    limit.t = n;
    verdict.limit_point = limit;

    const Sne sne = sne_closed_form(traj.params);
    verdict.at_sne = verdict.converged &&
                     std::abs(limit.p1 - sne.p1_star) <= opts.sne_tol &&
                     std::abs(limit.p2 - sne.p2_star) <= opts.sne_tol &&
                     std::abs(limit.r - sne.r_star) <= opts.sne_tol;

    if (!verdict.converged) {
        double amplitude = 0.0;
        for (const auto* col : cols) {
            const auto [lo, hi] = std::minmax_element(col->end() - opts.window, col->end());
            amplitude = std::max(amplitude, *hi - *lo);
        }
        verdict.oscillating = amplitude > opts.osc_tol;
    }
    return verdict;
}

BoundCheck check_rate_bound(const std::vector<double>& series,
                            const std::function<double(long)>& bound) {
    BoundCheck out;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const long t = static_cast<long>(k) + 1;
        if (series[k] > bound(t)) {
            out.holds = false;
            out.first_violation = t;
            break;
        }
    }
    return out;
}

BoundCheck record_bound_check(ConvergenceVerdict& verdict, const std::string& name,
                              const std::vector<double>& series,
                              const std::function<double(long)>& bound) {
    const BoundCheck check = check_rate_bound(series, bound);
    if (!check.holds) verdict.bound_violations.emplace_back(name, *check.first_violation);
    return check;
}

double fit_rate(const std::vector<double>& series, RateModel model, long first, long last) {
    const long n = static_cast<long>(series.size());
    if (first < 1 || last > n || last - first < 1)
        throw std::invalid_argument("fit_rate: bad fit range");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long count = 0;
    for (long t = first; t <= last; ++t) {
        const double v = series[static_cast<std::size_t>(t - 1)];
        if (!(v > 0.0))
            throw std::domain_error("fit_rate: nonpositive series value in fit range");
        const double x = model == RateModel::power ? std::log(static_cast<double>(t))
                                                   : static_cast<double>(t);
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) throw std::domain_error("fit_rate: degenerate fit range");
    return (count * sxy - sx * sy) / denom;
}

double fit_rate(const std::vector<double>& series, RateModel model) {
    const long n = static_cast<long>(series.size());
    return fit_rate(series, model, std::max<long>(1, n / 2), n);
}

} // namespace refprice
