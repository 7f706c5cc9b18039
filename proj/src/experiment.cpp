#include "refprice/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "refprice/equilibrium.hpp"
#include "refprice/omd.hpp"
#include "refprice/stepsize.hpp"

namespace refprice {

using nlohmann::json;

Regularizer RegularizerSpec::build() const {
    if (kind == "quadratic") return Regularizer::quadratic(scale);
    throw ConfigError("regularizer.kind: unknown kind '" + kind + "' (expected quadratic)");
}

StepSchedule ScheduleSpec::build() const {
    if (kind == "constant") return StepSchedule::constant(c);
    if (kind == "power") return StepSchedule::power(c, eta, offset);
    if (kind == "table") return StepSchedule::table(values);
    throw ConfigError("schedule.kind: unknown kind '" + kind +
                      "' (expected constant|power|table)");
}

std::string to_string(RunMode mode) {
    switch (mode) {
    case RunMode::simulate: return "simulate";
    case RunMode::simulate_induced: return "simulate-induced";
    case RunMode::best_response: return "best-response";
    case RunMode::sne: return "sne";
    case RunMode::const_region: return "const-region";
    case RunMode::rate_constant: return "rate-constant";
    case RunMode::sweep: return "sweep";
    }
    return "?";
}

RunMode mode_from_string(const std::string& s) {
    for (RunMode m : {RunMode::simulate, RunMode::simulate_induced, RunMode::best_response,
                      RunMode::sne, RunMode::const_region, RunMode::rate_constant,
                      RunMode::sweep})
        if (to_string(m) == s) return m;
    throw ConfigError("mode: unknown mode '" + s + "'");
}

MarketParams ExperimentConfig::market() const {
    try {
        return MarketParams(alpha, beta, delta, gamma, theta, a, p_lo, p_hi, m_explicit);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace {

std::array<double, 2> pair_of(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(field + ": expected an array of two numbers");
    return {j[0].get<double>(), j[1].get<double>()};
}

RegularizerSpec reg_spec_of(const json& j, const std::string& field) {
    RegularizerSpec spec;
    if (!j.is_object()) throw ConfigError(field + ": expected an object");
    spec.kind = j.value("kind", "quadratic");
    spec.scale = j.value("scale", 1.0);
    if (spec.kind != "quadratic")
        throw ConfigError(field + ".kind: unknown kind '" + spec.kind + "'");
    if (!(spec.scale > 0.0)) throw ConfigError(field + ".scale: must be > 0");
    return spec;
}

ScheduleSpec sched_spec_of(const json& j, const std::string& field) {
    ScheduleSpec spec;
    if (!j.is_object()) throw ConfigError(field + ": expected an object");
    spec.kind = j.value("kind", "");
    if (spec.kind == "constant") {
        if (!j.contains("c")) throw ConfigError(field + ".c: required for constant schedule");
        spec.c = j["c"].get<double>();
        if (!(spec.c >= 0.0)) throw ConfigError(field + ".c: must be >= 0");
    } else if (spec.kind == "power") {
        if (!j.contains("c") || !j.contains("eta"))
            throw ConfigError(field + ": power schedule needs c and eta");
        spec.c = j["c"].get<double>();
        spec.eta = j["eta"].get<double>();
        spec.offset = j.value("offset", 0.0);
        if (!(spec.c > 0.0)) throw ConfigError(field + ".c: must be > 0");
        if (!(spec.eta > 0.0)) throw ConfigError(field + ".eta: must be > 0");
        if (!(spec.offset >= 0.0)) throw ConfigError(field + ".offset: must be >= 0");
    } else if (spec.kind == "table") {
        if (!j.contains("values") || !j["values"].is_array() || j["values"].empty())
            throw ConfigError(field + ".values: table schedule needs a nonempty array");
        for (const auto& v : j["values"]) {
            const double e = v.get<double>();
            if (!(e > 0.0)) throw ConfigError(field + ".values: entries must be > 0");
            spec.values.push_back(e);
        }
    } else {
        throw ConfigError(field + ".kind: expected constant|power|table");
    }
    return spec;
}

json to_json(const RegularizerSpec& spec) {
    return json{{"kind", spec.kind}, {"scale", spec.scale}};
}

json to_json(const ScheduleSpec& spec) {
    json j{{"kind", spec.kind}};
    if (spec.kind == "constant") j["c"] = spec.c;
    if (spec.kind == "power") {
        j["c"] = spec.c;
        j["eta"] = spec.eta;
        j["offset"] = spec.offset;
    }
    if (spec.kind == "table") j["values"] = spec.values;
    return j;
}

void append_kv(std::string& out, const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
}

std::string fmt(double v, const char* format = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

std::string tri_name(StepSchedule::Tri t) {
    switch (t) {
    case StepSchedule::Tri::yes: return "yes";
    case StepSchedule::Tri::no: return "no";
    case StepSchedule::Tri::unknown: return "unknown";
    }
    return "?";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    if (!j.contains("mode")) throw ConfigError("mode: required");
    cfg.mode = mode_from_string(j["mode"].get<std::string>());

    if (!j.contains("market") || !j["market"].is_object())
        throw ConfigError("market: required object");
    const json& mk = j["market"];
    for (const char* field : {"alpha", "beta", "delta", "gamma", "theta"})
        if (!mk.contains(field))
            throw ConfigError(std::string("market.") + field + ": required");
    cfg.alpha = pair_of(mk["alpha"], "market.alpha");
    cfg.beta = pair_of(mk["beta"], "market.beta");
    cfg.delta = pair_of(mk["delta"], "market.delta");
    cfg.gamma = pair_of(mk["gamma"], "market.gamma");
    cfg.theta = pair_of(mk["theta"], "market.theta");
    if (!mk.contains("a") || !mk.contains("p_lo") || !mk.contains("p_hi"))
        throw ConfigError("market: a, p_lo, p_hi are required");
    cfg.a = mk["a"].get<double>();
    cfg.p_lo = mk["p_lo"].get<double>();
    cfg.p_hi = mk["p_hi"].get<double>();
    if (mk.contains("m")) cfg.m_explicit = mk["m"].get<double>();
    cfg.market(); // validate now; throws ConfigError naming the field

    if (j.contains("regularizers")) {
        const json& regs = j["regularizers"];
        if (!regs.is_array() || regs.size() != 2)
            throw ConfigError("regularizers: expected an array of two objects");
        cfg.regularizers[0] = reg_spec_of(regs[0], "regularizers[0]");
        cfg.regularizers[1] = reg_spec_of(regs[1], "regularizers[1]");
    }
    if (j.contains("nature_regularizer"))
        cfg.nature_regularizer = reg_spec_of(j["nature_regularizer"], "nature_regularizer");

    if (j.contains("schedules")) {
        const json& sch = j["schedules"];
        if (!sch.is_array() || sch.size() != 2)
            throw ConfigError("schedules: expected an array of two objects");
        cfg.schedules = {sched_spec_of(sch[0], "schedules[0]"),
                         sched_spec_of(sch[1], "schedules[1]")};
    }
    if (j.contains("nature_schedule"))
        cfg.nature_schedule = sched_spec_of(j["nature_schedule"], "nature_schedule");

    if (j.contains("init")) {
        const json& init = j["init"];
        if (!init.is_object() || !init.contains("p1") || !init.contains("p2") ||
            !init.contains("r"))
            throw ConfigError("init: expected an object with p1, p2, r");
        cfg.init = {init["p1"].get<double>(), init["p2"].get<double>(),
                    init["r"].get<double>()};
        cfg.r1 = (*cfg.init)[2];
    }
    if (j.contains("r1")) cfg.r1 = j["r1"].get<double>();
    cfg.has_initial_state = j.contains("init") || j.contains("r1");
    cfg.horizon = j.value("horizon", 1L);

    if (j.contains("diagnostics")) {
        const json& d = j["diagnostics"];
        cfg.diagnostics.tol = d.value("tol", cfg.diagnostics.tol);
        cfg.diagnostics.window = d.value("window", cfg.diagnostics.window);
        cfg.diagnostics.osc_tol = d.value("osc_tol", cfg.diagnostics.osc_tol);
        cfg.diagnostics.sne_tol = d.value("sne_tol", cfg.diagnostics.sne_tol);
        cfg.fit_tail_fraction = d.value("fit_tail_fraction", cfg.fit_tail_fraction);
        if (cfg.diagnostics.window < 2) throw ConfigError("diagnostics.window: must be >= 2");
        if (!(cfg.fit_tail_fraction > 0.0 && cfg.fit_tail_fraction < 1.0))
            throw ConfigError("diagnostics.fit_tail_fraction: must lie in (0,1)");
    }

    if (j.contains("sigma")) cfg.sigma = pair_of(j["sigma"], "sigma");

    if (j.contains("theta_bar")) cfg.theta_bar = j["theta_bar"].get<double>();
    cfg.horizon_guard = j.value("horizon_guard", 1000000L);

    if (j.contains("sweep")) {
        if (!j["sweep"].is_object()) throw ConfigError("sweep: expected an object");
        const json& sw = j["sweep"];
        cfg.sweep_quantity = sw.value("quantity", "");
        if (cfg.sweep_quantity != "rate-constant-c" && cfg.sweep_quantity != "sigma0")
            throw ConfigError("sweep.quantity: expected rate-constant-c|sigma0");
        if (!sw.contains("axes") || !sw["axes"].is_array() || sw["axes"].empty() ||
            sw["axes"].size() > 2)
            throw ConfigError("sweep.axes: expected one or two axes");
        for (const auto& ax : sw["axes"]) {
            SweepAxis axis;
            axis.name = ax.value("name", "");
            if (axis.name != "a" && axis.name != "theta_max" && axis.name != "m")
                throw ConfigError("sweep.axes.name: expected a|theta_max|m");
            if (!ax.contains("values") || !ax["values"].is_array() || ax["values"].empty())
                throw ConfigError("sweep.axes.values: nonempty array required");
            for (const auto& v : ax["values"]) axis.values.push_back(v.get<double>());
            cfg.sweep_axes.push_back(std::move(axis));
        }
        for (const auto& axis : cfg.sweep_axes) {
            if (cfg.sweep_quantity == "sigma0" && axis.name != "m")
                throw ConfigError("sweep.axes: sigma0 sweeps take only an m axis");
            if (cfg.sweep_quantity == "rate-constant-c" && axis.name == "m")
                throw ConfigError("sweep.axes: rate-constant-c sweeps take a|theta_max axes");
        }
    }

    if (j.contains("output")) {
        const json& out = j["output"];
        cfg.trajectory_csv = out.value("trajectory_csv", cfg.trajectory_csv);
        cfg.report_txt = out.value("report", cfg.report_txt);
        cfg.matrix_csv = out.value("matrix_csv", cfg.matrix_csv);
    }
    validate_mode_requirements(cfg);
    return cfg;
}

void validate_mode_requirements(const ExperimentConfig& cfg) {
    const bool needs_schedules =
        cfg.mode == RunMode::simulate || cfg.mode == RunMode::simulate_induced;
    const bool dynamic = needs_schedules || cfg.mode == RunMode::best_response;

    if (needs_schedules && !cfg.schedules)
        throw ConfigError("schedules: required for mode " + to_string(cfg.mode));
    if (dynamic) {
        if (!cfg.has_initial_state)
            throw ConfigError(
                "init/r1: an initial state (init) or reference price (r1) is required for mode " +
                to_string(cfg.mode));
        if (cfg.horizon < 1) throw ConfigError("horizon: must be >= 1");
    }
    if (needs_schedules)
        for (int k = 0; k < 2; ++k)
            if ((*cfg.schedules)[k].kind == "table" &&
                static_cast<long>((*cfg.schedules)[k].values.size()) < cfg.horizon)
                throw ConfigError("schedules[" + std::to_string(k) +
                                  "].values: table shorter than horizon");
    if (cfg.mode == RunMode::const_region && !(cfg.sigma[0] > 0.0 && cfg.sigma[1] > 0.0))
        throw ConfigError("sigma: must be > 0 for const-region mode");
    if (cfg.mode == RunMode::sweep && cfg.sweep_axes.empty())
        throw ConfigError("sweep: required object for sweep mode");
}

void set_mode(ExperimentConfig& cfg, RunMode mode) {
    cfg.mode = mode;
    validate_mode_requirements(cfg);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
    json j;
    j["mode"] = to_string(cfg.mode);
    j["market"] = {{"alpha", cfg.alpha}, {"beta", cfg.beta},   {"delta", cfg.delta},
                   {"gamma", cfg.gamma}, {"theta", cfg.theta}, {"a", cfg.a},
                   {"p_lo", cfg.p_lo},   {"p_hi", cfg.p_hi}};
    if (cfg.m_explicit) j["market"]["m"] = *cfg.m_explicit;
    j["regularizers"] = {to_json(cfg.regularizers[0]), to_json(cfg.regularizers[1])};
    if (cfg.nature_regularizer) j["nature_regularizer"] = to_json(*cfg.nature_regularizer);
    if (cfg.schedules)
        j["schedules"] = {to_json((*cfg.schedules)[0]), to_json((*cfg.schedules)[1])};
    if (cfg.nature_schedule) j["nature_schedule"] = to_json(*cfg.nature_schedule);
    if (cfg.init)
        j["init"] = {{"p1", (*cfg.init)[0]}, {"p2", (*cfg.init)[1]}, {"r", (*cfg.init)[2]}};
    if (cfg.has_initial_state) j["r1"] = cfg.r1;
    j["horizon"] = cfg.horizon;
    j["diagnostics"] = {{"tol", cfg.diagnostics.tol},
                        {"window", cfg.diagnostics.window},
                        {"osc_tol", cfg.diagnostics.osc_tol},
                        {"sne_tol", cfg.diagnostics.sne_tol},
                        {"fit_tail_fraction", cfg.fit_tail_fraction}};
    j["sigma"] = cfg.sigma;
    if (cfg.theta_bar) j["theta_bar"] = *cfg.theta_bar;
    j["horizon_guard"] = cfg.horizon_guard;
    if (cfg.mode == RunMode::sweep) {
        json axes = json::array();
        for (const auto& ax : cfg.sweep_axes)
            axes.push_back({{"name", ax.name}, {"values", ax.values}});
        j["sweep"] = {{"quantity", cfg.sweep_quantity}, {"axes", axes}};
    }
    j["output"] = {{"trajectory_csv", cfg.trajectory_csv},
                   {"report", cfg.report_txt},
                   {"matrix_csv", cfg.matrix_csv}};
    return j.dump(2) + "\n";
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    write_text_file(path, dump_config(cfg));
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const DistanceSeries& dist) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,p1,p2,r,y1,y2,g1,g2,gn,d1,d2,rev1,rev2,x_t,x_n_t\n";
    char buf[512];
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::snprintf(buf, sizeof(buf),
                      "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%.17g,%.17g\n",
                      k + 1, traj.p1[k], traj.p2[k], traj.r[k], traj.y1[k], traj.y2[k],
                      traj.g1[k], traj.g2[k], traj.gn[k], traj.d1[k], traj.d2[k],
                      traj.rev1[k], traj.rev2[k], dist.x[k], dist.x_n[k]);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::string sne_report(const MarketParams& params, const Sne& sne) {
    std::string rep;
    append_kv(rep, "p1_star", fmt(sne.p1_star, "%.4f"));
    append_kv(rep, "p2_star", fmt(sne.p2_star, "%.4f"));
    append_kv(rep, "r_star", fmt(sne.r_star, "%.4f"));
    append_kv(rep, "p1_star_full", fmt(sne.p1_star));
    append_kv(rep, "p2_star_full", fmt(sne.p2_star));
    append_kv(rep, "r_star_full", fmt(sne.r_star));
    append_kv(rep, "interior", sne.interior ? "true" : "false");
    append_kv(rep, "m", fmt(params.m()));
    return rep;
}

std::string schedule_class_report(const char* key, const StepSchedule& sched) {
    const ScheduleClass cls = classify_schedule(sched);
    std::string rep;
    append_kv(rep, std::string(key) + "_label", cls.label);
    append_kv(rep, std::string(key) + "_sum_diverges", tri_name(cls.sum_diverges));
    append_kv(rep, std::string(key) + "_sum_sq_converges", tri_name(cls.sum_sq_converges));
    append_kv(rep, std::string(key) + "_limit_zero", tri_name(cls.limit_zero));
    return rep;
}

std::string verdict_report(ConvergenceVerdict& v, const Trajectory& traj,
                           const DistanceSeries& dist, const ExperimentConfig& cfg,
                           bool constant_steps) {
    std::string rep;
    append_kv(rep, "schedule_1", traj.sched1_desc);
    append_kv(rep, "schedule_2", traj.sched2_desc);
    append_kv(rep, "schedule_n", traj.schedn_desc);
    append_kv(rep, "converged", v.converged ? "true" : "false");
    if (v.t_converged) append_kv(rep, "t_converged", std::to_string(*v.t_converged));
    append_kv(rep, "oscillating", v.oscillating ? "true" : "false");
    append_kv(rep, "at_sne", v.at_sne ? "true" : "false");
    if (v.limit_point) {
        append_kv(rep, "limit_p1", fmt(v.limit_point->p1));
        append_kv(rep, "limit_p2", fmt(v.limit_point->p2));
        append_kv(rep, "limit_r", fmt(v.limit_point->r));
    }
    append_kv(rep, "final_price_dist", fmt(std::sqrt(dist.x.back())));
    append_kv(rep, "final_ref_dist", fmt(std::sqrt(dist.x_n.back())));

    const long n = static_cast<long>(traj.size());
    const long first = std::max<long>(1, static_cast<long>(
                                             std::floor((1.0 - cfg.fit_tail_fraction) * n)) +
                                             1);
    bool positive = true;
    for (long t = first; t <= n; ++t) positive = positive && dist.x[t - 1] > 0.0;
    if (positive && n - first >= 1) {
        const double power = fit_rate(dist.x, RateModel::power, first, n);
        const double geometric = fit_rate(dist.x, RateModel::geometric, first, n);
        v.rate_slope = constant_steps ? geometric : power;
        append_kv(rep, "power_slope_tail", fmt(power));
        append_kv(rep, "geometric_slope_tail", fmt(geometric));
    }

    for (const auto& [name, first_violation] : v.bound_violations)
        append_kv(rep, "bound_" + name + "_first_violation", std::to_string(first_violation));
    return rep;
}

// Certified-rate checks apply only to runs configured in their premises: the
// geometric certificate to constant steps at the region's recommended values
// with matching quadratic maps, the c/t bound to 1/(t+1)-band schedules with
// R(z) = z^2.
std::string bound_check_report(ConvergenceVerdict& v, const MarketParams& params,
                               const DistanceSeries& dist, const Regularizer& reg1,
                               const Regularizer& reg2, const StepSchedule& sched1,
                               const StepSchedule& sched2) {
    std::string rep;
    const bool quadratic =
        reg1.kind == Regularizer::Kind::quadratic && reg2.kind == Regularizer::Kind::quadratic;

    if (quadratic && reg1.scale == reg2.scale &&
        sched1.kind == StepSchedule::Kind::constant &&
        sched2.kind == StepSchedule::Kind::constant) {
        const double sigma = reg1.scale;
        const ConstStepReport region = const_step_region(params, sigma, sigma);
        if (region.feasible &&
            std::abs(sched1.c - region.recommended_eps[0]) <= 1e-9 &&
            std::abs(sched2.c - region.recommended_eps[1]) <= 1e-9) {
            const auto chk = record_bound_check(
                v, "geometric-rate", dist.x,
                [&](long t) { return geometric_rate_bound(params, sigma, t); });
            append_kv(rep, "bound_geometric_rate_holds", chk.holds ? "true" : "false");
        }
    }

    if (quadratic && reg1.scale == 2.0 && reg2.scale == 2.0 &&
        sched1.kind == StepSchedule::Kind::power && sched1.eta == 1.0 &&
        sched1.offset == 1.0 && sched2.kind == StepSchedule::Kind::power &&
        sched2.eta == 1.0 && sched2.offset == 1.0 && params.m() >= 2.0) {
        const auto band = decreasing_step_band(params, 0);
        if (sched1.c >= band[0].lower && sched1.c <= band[0].upper &&
            sched2.c >= band[1].lower && sched2.c <= band[1].upper) {
            try {
                const double theta_bar = (1.0 + params.theta_max()) / 2.0;
                const RateConstantReport rc = rate_constant(params, theta_bar);
                const auto chk = record_bound_check(
                    v, "c-over-t", dist.x,
                    [&](long t) { return rc.c / static_cast<double>(t); });
                append_kv(rep, "bound_rate_c", fmt(rc.c));
                append_kv(rep, "bound_c_over_t_holds", chk.holds ? "true" : "false");
            } catch (const std::runtime_error&) {
                append_kv(rep, "bound_c_over_t_holds", "guard-overflow");
            }
        }
    }
    return rep;
}

int run_simulate(const ExperimentConfig& cfg, const RunOptions& opts,
                 const std::filesystem::path& out_dir, bool induced) {
    const MarketParams params = cfg.market();
    const Regularizer reg1 = cfg.regularizers[0].build();
    const Regularizer reg2 = cfg.regularizers[1].build();
    const StepSchedule sched1 = (*cfg.schedules)[0].build();
    const StepSchedule sched2 = (*cfg.schedules)[1].build();
    const long horizon = opts.horizon_override.value_or(cfg.horizon);

    PriceState init;
    if (cfg.init) {
        init.p1 = (*cfg.init)[0];
        init.p2 = (*cfg.init)[1];
        init.r = (*cfg.init)[2];
    } else {
        init = initial_state_argmin(params, reg1, reg2, cfg.r1);
    }

    Trajectory traj(params);
    if (induced) {
        const Regularizer reg_n = cfg.nature_regularizer ? cfg.nature_regularizer->build()
                                                         : default_nature_regularizer();
        const StepSchedule sched_n =
            cfg.nature_schedule ? cfg.nature_schedule->build() : default_nature_schedule(params);
        traj = simulate_induced(params, reg1, reg2, reg_n, sched1, sched2, sched_n, init,
                                horizon);
    } else {
        traj = simulate(params, reg1, reg2, sched1, sched2, init, horizon);
    }

    const Sne sne = sne_closed_form(params);
    const DistanceSeries dist = dist_to_sne(traj, sne);
    write_trajectory_csv((out_dir / cfg.trajectory_csv).string(), traj, dist);

    std::string rep;
    append_kv(rep, "mode", to_string(cfg.mode));
    rep += sne_report(params, sne);
    rep += schedule_class_report("class_1", sched1);
    rep += schedule_class_report("class_2", sched2);

    ConvergenceVerdict verdict = detect_convergence(traj, cfg.diagnostics);
    const std::string bounds =
        bound_check_report(verdict, params, dist, reg1, reg2, sched1, sched2);
    const bool constant_steps = sched1.kind == StepSchedule::Kind::constant &&
                                sched2.kind == StepSchedule::Kind::constant;
    rep += verdict_report(verdict, traj, dist, cfg, constant_steps);
    rep += bounds;

    if (induced) {
        // Cross-check against the two-firm loop when nature runs its defaults.
        const bool defaults = !cfg.nature_regularizer && !cfg.nature_schedule;
        if (defaults) {
            const Trajectory ref = simulate(params, reg1, reg2, sched1, sched2, init, horizon);
            double dev = 0.0;
            for (std::size_t k = 0; k < ref.size(); ++k) {
                dev = std::max(dev, std::abs(ref.p1[k] - traj.p1[k]));
                dev = std::max(dev, std::abs(ref.p2[k] - traj.p2[k]));
                dev = std::max(dev, std::abs(ref.r[k] - traj.r[k]));
            }
            append_kv(rep, "max_deviation_vs_two_firm", fmt(dev));
        }
    }
    write_text_file((out_dir / cfg.report_txt).string(), rep);
    if (!opts.quiet) std::fputs(rep.c_str(), stdout);
    return 0;
}

int run_best_response(const ExperimentConfig& cfg, const RunOptions& opts,
                      const std::filesystem::path& out_dir) {
    const MarketParams params = cfg.market();
    const long horizon = opts.horizon_override.value_or(cfg.horizon);
    const Trajectory traj = best_response_dynamics(params, cfg.r1, horizon);
    const Sne sne = sne_closed_form(params);
    const DistanceSeries dist = dist_to_sne(traj, sne);
    write_trajectory_csv((out_dir / cfg.trajectory_csv).string(), traj, dist);

    bool nondecreasing = true, nonincreasing = true;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        nondecreasing = nondecreasing && traj.r[k] >= traj.r[k - 1];
        nonincreasing = nonincreasing && traj.r[k] <= traj.r[k - 1];
    }
    std::string rep;
    append_kv(rep, "mode", to_string(cfg.mode));
    rep += sne_report(params, sne);
    append_kv(rep, "r1", fmt(cfg.r1));
    append_kv(rep, "r_monotone",
              nondecreasing ? "nondecreasing" : (nonincreasing ? "nonincreasing" : "no"));
    append_kv(rep, "final_p1", fmt(traj.p1.back()));
    append_kv(rep, "final_p2", fmt(traj.p2.back()));
    append_kv(rep, "final_r", fmt(traj.r.back()));
    append_kv(rep, "final_price_dist", fmt(std::sqrt(dist.x.back())));
    write_text_file((out_dir / cfg.report_txt).string(), rep);
    if (!opts.quiet) std::fputs(rep.c_str(), stdout);
    return 0;
}

int run_const_region(const ExperimentConfig& cfg, const RunOptions& opts,
                     const std::filesystem::path& out_dir) {
    const MarketParams params = cfg.market();
    const ConstStepReport rep0 = const_step_region(params, cfg.sigma[0], cfg.sigma[1]);
    std::string rep;
    append_kv(rep, "mode", to_string(cfg.mode));
    append_kv(rep, "m", fmt(params.m()));
    append_kv(rep, "sigma1", fmt(cfg.sigma[0]));
    append_kv(rep, "sigma2", fmt(cfg.sigma[1]));
    append_kv(rep, "sigma0", fmt(rep0.sigma0));
    append_kv(rep, "feasible", rep0.feasible ? "true" : "false");
    if (rep0.feasible) {
        append_kv(rep, "z1", fmt(rep0.z1));
        append_kv(rep, "z2", fmt(rep0.z2));
        append_kv(rep, "s_tilde", fmt(rep0.s_tilde));
        append_kv(rep, "H", fmt(rep0.H));
        append_kv(rep, "eps_1", fmt(rep0.recommended_eps[0]));
        append_kv(rep, "eps_2", fmt(rep0.recommended_eps[1]));
    } else {
        append_kv(rep, "reason", rep0.reason);
    }
    write_text_file((out_dir / cfg.report_txt).string(), rep);
    if (!opts.quiet) std::fputs(rep.c_str(), stdout);
    return 0;
}

int run_rate_constant(const ExperimentConfig& cfg, const RunOptions& opts,
                      const std::filesystem::path& out_dir) {
    const MarketParams params = cfg.market();
    const double theta_bar = cfg.theta_bar.value_or((1.0 + params.theta_max()) / 2.0);
    std::string rep;
    append_kv(rep, "mode", to_string(cfg.mode));
    append_kv(rep, "theta_bar", fmt(theta_bar));
    try {
        const RateConstantReport rc = rate_constant(params, theta_bar, cfg.horizon_guard);
        append_kv(rep, "rho_a", std::to_string(rc.rho_a));
        append_kv(rep, "t_a", std::to_string(rc.t_a));
        append_kv(rep, "t_theta", std::to_string(rc.t_theta));
        append_kv(rep, "t_tilde", std::to_string(rc.t_tilde));
        append_kv(rep, "u", fmt(rc.u));
        append_kv(rep, "c2", fmt(rc.c2));
        append_kv(rep, "c", fmt(rc.c));
        const auto band = decreasing_step_band(params, 0);
        append_kv(rep, "band_1", "[" + fmt(band[0].lower) + ", " + fmt(band[0].upper) + "]");
        append_kv(rep, "band_2", "[" + fmt(band[1].lower) + ", " + fmt(band[1].upper) + "]");
    } catch (const std::runtime_error& e) {
        append_kv(rep, "overflow", e.what());
    }
    write_text_file((out_dir / cfg.report_txt).string(), rep);
    if (!opts.quiet) std::fputs(rep.c_str(), stdout);
    return 0;
}

int run_sweep(const ExperimentConfig& cfg, const RunOptions& opts,
              const std::filesystem::path& out_dir) {
    const auto cell_value = [&](double v1, std::optional<double> v2) {
        double a = cfg.a;
        double theta_max = std::max(cfg.theta[0], cfg.theta[1]);
        double m = 0.0;
        const auto assign = [&](const std::string& name, double v) {
            if (name == "a") a = v;
            else if (name == "theta_max") theta_max = v;
            else m = v;
        };
        assign(cfg.sweep_axes[0].name, v1);
        if (v2) assign(cfg.sweep_axes[1].name, *v2);

        if (cfg.sweep_quantity == "sigma0") return sigma0(m);
        MarketParams params(cfg.alpha, cfg.beta, cfg.delta, cfg.gamma,
                            {theta_max, 1.0 - theta_max}, a, cfg.p_lo, cfg.p_hi,
                            cfg.m_explicit);
        const double theta_bar = (cfg.theta_bar && *cfg.theta_bar > theta_max)
                                     ? *cfg.theta_bar
                                     : (1.0 + theta_max) / 2.0;
        return rate_constant(params, theta_bar, cfg.horizon_guard).c;
    };

    std::ostringstream csv;
    char buf[64];
    if (cfg.sweep_axes.size() == 1) {
        csv << cfg.sweep_axes[0].name << "," << cfg.sweep_quantity << "\n";
        for (double v : cfg.sweep_axes[0].values) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", v, cell_value(v, std::nullopt));
            csv << buf;
        }
    } else {
        csv << cfg.sweep_axes[0].name << "\\" << cfg.sweep_axes[1].name;
        for (double v2 : cfg.sweep_axes[1].values) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v2);
            csv << buf;
        }
        csv << "\n";
        for (double v1 : cfg.sweep_axes[0].values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v1);
            csv << buf;
            for (double v2 : cfg.sweep_axes[1].values) {
                std::snprintf(buf, sizeof(buf), ",%.17g", cell_value(v1, v2));
                csv << buf;
            }
            csv << "\n";
        }
    }
    write_text_file((out_dir / cfg.matrix_csv).string(), csv.str());
    if (!opts.quiet)
        std::printf("sweep: wrote %s\n", (out_dir / cfg.matrix_csv).string().c_str());
    return 0;
}

} // namespace

int run(const ExperimentConfig& cfg, const RunOptions& opts) {
    try {
        const std::filesystem::path out_dir(opts.out_dir);
        std::filesystem::create_directories(out_dir);
        save_config(cfg, (out_dir / "resolved_config.json").string());

        switch (cfg.mode) {
        case RunMode::simulate:
            return run_simulate(cfg, opts, out_dir, false);
        case RunMode::simulate_induced:
            return run_simulate(cfg, opts, out_dir, true);
        case RunMode::best_response:
            return run_best_response(cfg, opts, out_dir);
        case RunMode::sne: {
            const MarketParams params = cfg.market();
            std::string rep;
            append_kv(rep, "mode", to_string(cfg.mode));
            rep += sne_report(params, sne_closed_form(params));
            write_text_file((out_dir / cfg.report_txt).string(), rep);
            if (!opts.quiet) std::fputs(rep.c_str(), stdout);
            return 0;
        }
        case RunMode::const_region:
            return run_const_region(cfg, opts, out_dir);
        case RunMode::rate_constant:
            return run_rate_constant(cfg, opts, out_dir);
        case RunMode::sweep:
            return run_sweep(cfg, opts, out_dir);
        }
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

} // namespace refprice
