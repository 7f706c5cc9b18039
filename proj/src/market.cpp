#include "refprice/market.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace refprice {

namespace {

[[noreturn]] void reject(const std::string& field, const std::string& why) {
    throw std::invalid_argument("MarketParams: " + field + ": " + why);
}

void check_price_in_box(const MarketParams& params, double x, const char* name) {
    if (!std::isfinite(x) || x < params.p_lo() || x > params.p_hi()) {
        std::ostringstream os;
        os << name << " = " << x << " outside price box [" << params.p_lo() << ", "
           << params.p_hi() << "]";
        throw std::domain_error(os.str());
    }
}

} // namespace

MarketParams::MarketParams(std::array<double, 2> alpha, std::array<double, 2> beta,
                           std::array<double, 2> delta, std::array<double, 2> gamma,
                           std::array<double, 2> theta, double a, double p_lo,
                           double p_hi, std::optional<double> m)
    : alpha_(alpha), beta_(beta), delta_(delta), gamma_(gamma), theta_(theta),
      a_(a), p_lo_(p_lo), p_hi_(p_hi), m_(0.0) {
    const char* firm_name[2] = {"1", "2"};
    for (int i = 0; i < 2; ++i) {
        if (!(alpha_[i] > 0.0)) reject("alpha_" + std::string(firm_name[i]), "must be > 0");
        if (!(beta_[i] > 0.0)) reject("beta_" + std::string(firm_name[i]), "must be > 0");
        if (!(delta_[i] > 0.0)) reject("delta_" + std::string(firm_name[i]), "must be > 0");
        if (!(gamma_[i] > 0.0)) reject("gamma_" + std::string(firm_name[i]), "must be > 0");
        if (!(theta_[i] > 0.0 && theta_[i] < 1.0))
            reject("theta_" + std::string(firm_name[i]), "must lie in (0,1)");
    }
    if (std::abs(theta_[0] + theta_[1] - 1.0) > 1e-12)
        reject("theta", "theta_1 + theta_2 must equal 1");
    if (!(a_ > 0.0 && a_ < 1.0)) reject("a", "must lie in (0,1)");
    if (!(p_lo_ > 0.0)) reject("p_lo", "must be > 0");
    if (!(std::isfinite(p_hi_) && p_hi_ > p_lo_)) reject("p_hi", "must satisfy p_lo < p_hi < inf");

    const double derived =
        std::min(beta_[0] / (delta_[0] + gamma_[0]), beta_[1] / (delta_[1] + gamma_[1]));
    if (m.has_value()) {
        if (!(*m > 0.0)) reject("m", "must be > 0");
        if (*m > derived + 1e-12)
            reject("m", "exceeds min_i beta_i/(delta_i+gamma_i); beta_i >= m*(delta_i+gamma_i) fails");
        m_ = *m;
    } else {
        m_ = derived;
    }

    // Linear demand is minimized over the box at (p_i, p_other, r) = (p_hi, p_lo, p_lo),
    // so the corner check certifies nonnegativity everywhere.
    for (int i = 0; i < 2; ++i) {
        const double corner = alpha_[i] - beta_[i] * p_hi_ + delta_[i] * p_lo_ + gamma_[i] * p_lo_;
        if (corner < 0.0)
            reject("alpha_" + std::string(firm_name[i]),
                   "demand negative at box corner (alpha_i - beta_i*p_hi + (delta_i+gamma_i)*p_lo < 0)");
    }
}

double demand(const MarketParams& params, Firm i, double p_i, double p_other, double r) {
    check_price_in_box(params, p_i, "p_i");
    check_price_in_box(params, p_other, "p_other");
    check_price_in_box(params, r, "r");
    return params.alpha(i) - params.beta(i) * p_i + params.delta(i) * p_other +
           params.gamma(i) * r;
}

double revenue(const MarketParams& params, Firm i, double p1, double p2, double r) {
    const double own = (i == Firm::one) ? p1 : p2;
    const double rival = (i == Firm::one) ? p2 : p1;
    return own * demand(params, i, own, rival, r);
}

double gradient(const MarketParams& params, Firm i, double p1, double p2, double r) {
    const double own = (i == Firm::one) ? p1 : p2;
    const double rival = (i == Firm::one) ? p2 : p1;
    check_price_in_box(params, own, "p_i");
    check_price_in_box(params, rival, "p_other");
    check_price_in_box(params, r, "r");
    return 2.0 * params.beta(i) * own -
           (params.alpha(i) + params.delta(i) * rival + params.gamma(i) * r);
}

double nature_gradient(const MarketParams& params, double p1, double p2, double r) {
    check_price_in_box(params, p1, "p1");
    check_price_in_box(params, p2, "p2");
    check_price_in_box(params, r, "r");
    return r - (params.theta(Firm::one) * p1 + params.theta(Firm::two) * p2);
}

double reference_update(const MarketParams& params, double r, double p1, double p2) {
    check_price_in_box(params, r, "r");
    check_price_in_box(params, p1, "p1");
    check_price_in_box(params, p2, "p2");
    return params.a() * r +
           (1.0 - params.a()) * (params.theta(Firm::one) * p1 + params.theta(Firm::two) * p2);
}

double project(const MarketParams& params, double x) {
    if (x < params.p_lo()) return params.p_lo();
    if (x > params.p_hi()) return params.p_hi();
    return x;
}

double surcharge_form_demand(const MarketParams& params, Firm i, double p_i,
                             double p_other, double r) {
    check_price_in_box(params, p_i, "p_i");
    check_price_in_box(params, p_other, "p_other");
    check_price_in_box(params, r, "r");
    return params.alpha(i) - (params.beta(i) - params.gamma(i)) * p_i +
           params.delta(i) * p_other + params.gamma(i) * (r - p_i);
}

} // namespace refprice
