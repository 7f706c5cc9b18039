#include "refprice/omd.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace refprice {

Regularizer Regularizer::quadratic(double scale) {
    if (!(scale > 0.0))
        throw std::invalid_argument("Regularizer::quadratic: scale must be > 0");
    Regularizer reg;
    reg.kind = Kind::quadratic;
    reg.scale = scale;
    reg.sigma = scale;
    reg.value = [scale](double z) { return scale * z * z / 2.0; };
    reg.derivative = [scale](double z) { return scale * z; };
    reg.inverse_derivative = [scale](double v) { return v / scale; };
    return reg;
}

Regularizer Regularizer::custom(std::function<double(double)> value,
                                std::function<double(double)> der,
                                std::function<double(double)> inv, double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("Regularizer::custom: sigma must be > 0");
    Regularizer reg;
    reg.kind = Kind::custom;
    reg.scale = 0.0;
    reg.sigma = sigma;
    reg.value = std::move(value);
    reg.derivative = std::move(der);
    reg.inverse_derivative = std::move(inv);
    return reg;
}

StepSchedule StepSchedule::constant(double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("StepSchedule::constant: c must be >= 0");
    StepSchedule s;
    s.kind = Kind::constant;
    s.c = c;
    return s;
}

StepSchedule StepSchedule::power(double c, double eta, double offset) {
    if (!(c > 0.0)) throw std::invalid_argument("StepSchedule::power: c must be > 0");
    if (!(eta > 0.0)) throw std::invalid_argument("StepSchedule::power: eta must be > 0");
    if (!(offset >= 0.0)) throw std::invalid_argument("StepSchedule::power: offset must be >= 0");
    StepSchedule s;
    s.kind = Kind::power;
    s.c = c;
    s.eta = eta;
    s.offset = offset;
    return s;
}

StepSchedule StepSchedule::table(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("StepSchedule::table: empty table");
    for (double v : values)
        if (!(v > 0.0)) throw std::invalid_argument("StepSchedule::table: entries must be > 0");
    StepSchedule s;
    s.kind = Kind::table;
    s.values = std::move(values);
    return s;
}

double StepSchedule::value(long t) const {
    if (t < 1) throw std::domain_error("StepSchedule::value: t must be >= 1");
    switch (kind) {
    case Kind::constant:
        return c;
    case Kind::power:
        return c / std::pow(static_cast<double>(t) + offset, eta);
    case Kind::table:
        if (static_cast<std::size_t>(t) > values.size())
            throw std::out_of_range("StepSchedule::value: period beyond table length");
        return values[static_cast<std::size_t>(t - 1)];
    }
    throw std::logic_error("StepSchedule::value: bad kind");
}

std::string StepSchedule::describe() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::constant:
        os << "constant{" << c << "}";
        break;
    case Kind::power:
        os << "power{" << c << "/(t+" << offset << ")^" << eta << "}";
        break;
    case Kind::table:
        os << "table{" << values.size() << " entries}";
        break;
    }
    return os.str();
}

ScheduleClass classify_schedule(const StepSchedule& sched) {
    using Tri = StepSchedule::Tri;
    ScheduleClass cls;
    switch (sched.kind) {
    case StepSchedule::Kind::constant:
        if (sched.c == 0.0) {
            cls.sum_diverges = Tri::no;
            cls.sum_sq_converges = Tri::yes;
            cls.limit_zero = Tri::yes;
        } else {
            cls.sum_diverges = Tri::yes;
            cls.sum_sq_converges = Tri::no;
            cls.limit_zero = Tri::no;
        }
        break;
    case StepSchedule::Kind::power:
        cls.sum_diverges = sched.eta <= 1.0 ? Tri::yes : Tri::no;
        cls.sum_sq_converges = sched.eta > 0.5 ? Tri::yes : Tri::no;
        cls.limit_zero = Tri::yes; // eta > 0 by construction
        break;
    case StepSchedule::Kind::table:
        cls.sum_diverges = Tri::unknown;
        cls.sum_sq_converges = Tri::unknown;
        cls.limit_zero = Tri::unknown;
        break;
    }

    if (cls.limit_zero == Tri::no)
        cls.label = "non-vanishing steps: no convergence guarantee";
    else if (cls.sum_diverges == Tri::yes && cls.sum_sq_converges == Tri::yes)
        cls.label = "SNE-convergent (vanishing, divergent sum, square-summable)";
    else if (cls.sum_diverges == Tri::no)
        cls.label = "summable steps: may converge off-SNE";
    else
        cls.label = "unclassified";
    return cls;
}

double mirror_step(const Regularizer& reg, double p, double eps, double g) {
    if (!(eps >= 0.0)) throw std::invalid_argument("mirror_step: eps must be >= 0");
    if (eps == 0.0 || g == 0.0) return p;
    const double target = reg.derivative(p) - eps * g;
    const double y = reg.inverse_derivative(target);
    if (!std::isfinite(y) || std::abs(reg.derivative(y) - target) >
                                 1e-8 * std::max(1.0, std::abs(target)))
        throw std::runtime_error("mirror_step: inverse_derivative does not invert derivative");
    return y;
}

PriceState initial_state_argmin(const MarketParams& params, const Regularizer& reg1,
                                const Regularizer& reg2, double r1) {
    // Strictly convex R has its box-constrained minimizer at the clamped
    // stationary point (R')^{-1}(0).
    PriceState s;
    s.p1 = project(params, reg1.inverse_derivative(0.0));
    s.p2 = project(params, reg2.inverse_derivative(0.0));
    s.r = r1;
    s.t = 1;
    return s;
}

namespace {

void check_init(const MarketParams& params, const PriceState& init, long horizon) {
    if (!params.in_box(init.p1) || !params.in_box(init.p2) || !params.in_box(init.r))
        throw std::domain_error("simulate: initial state outside price box");
    if (horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
}

bool is_default_nature(const MarketParams& params, const Regularizer& reg_n,
                       const StepSchedule& sched_n) {
    return reg_n.kind == Regularizer::Kind::quadratic && reg_n.scale == 1.0 &&
           sched_n.kind == StepSchedule::Kind::constant && sched_n.c == 1.0 - params.a();
}

} // namespace

Trajectory simulate(const MarketParams& params, const Regularizer& reg1,
                    const Regularizer& reg2, const StepSchedule& sched1,
                    const StepSchedule& sched2, const PriceState& init, long horizon) {
    check_init(params, init, horizon);

    Trajectory traj(params);
    traj.reserve(static_cast<std::size_t>(horizon));
    traj.sched1_desc = sched1.describe();
    traj.sched2_desc = sched2.describe();
    traj.schedn_desc = "reference-update";

    double y1 = init.p1, y2 = init.p2, r = init.r;
    for (long t = 1; t <= horizon; ++t) {
        const double p1 = project(params, y1);
        const double p2 = project(params, y2);
        const double g1 = gradient(params, Firm::one, p1, p2, r);
        const double g2 = gradient(params, Firm::two, p1, p2, r);
        traj.push_period(p1, p2, r, y1, y2);

        // Both firms update from the same period-t state; the reference
        // price moves last.
        y1 = mirror_step(reg1, p1, sched1.value(t), g1);
        y2 = mirror_step(reg2, p2, sched2.value(t), g2);
        r = reference_update(params, r, p1, p2);
    }
    return traj;
}

Trajectory simulate_induced(const MarketParams& params, const Regularizer& reg1,
                            const Regularizer& reg2, const Regularizer& reg_n,
                            const StepSchedule& sched1, const StepSchedule& sched2,
                            const StepSchedule& sched_n, const PriceState& init,
                            long horizon) {
    check_init(params, init, horizon);

    Trajectory traj(params);
    traj.reserve(static_cast<std::size_t>(horizon));
    traj.sched1_desc = sched1.describe();
    traj.sched2_desc = sched2.describe();
    traj.schedn_desc = sched_n.describe();

    // With the default nature player (quadratic scale 1, constant step 1-a)
    // the mirror step r - (1-a)*(r - s) equals the reference update
    // a*r + (1-a)*s algebraically; computing it in the latter form keeps the
    // induced trajectory bit-identical to simulate().
    const bool nature_default = is_default_nature(params, reg_n, sched_n);

    double y1 = init.p1, y2 = init.p2, yn = init.r;
    for (long t = 1; t <= horizon; ++t) {
        const double p1 = project(params, y1);
        const double p2 = project(params, y2);
        const double pn = project(params, yn);
        const double g1 = gradient(params, Firm::one, p1, p2, pn);
        const double g2 = gradient(params, Firm::two, p1, p2, pn);
        const double gn = nature_gradient(params, p1, p2, pn);
        traj.push_period(p1, p2, pn, y1, y2);

        y1 = mirror_step(reg1, p1, sched1.value(t), g1);
        y2 = mirror_step(reg2, p2, sched2.value(t), g2);
        yn = nature_default ? reference_update(params, pn, p1, p2)
                            : mirror_step(reg_n, pn, sched_n.value(t), gn);
    }
    return traj;
}

Regularizer default_nature_regularizer() { return Regularizer::quadratic(1.0); }

StepSchedule default_nature_schedule(const MarketParams& params) {
    return StepSchedule::constant(1.0 - params.a());
}

} // namespace refprice
