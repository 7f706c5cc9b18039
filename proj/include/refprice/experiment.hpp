#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "refprice/diagnostics.hpp"
#include "refprice/market.hpp"
#include "refprice/omd.hpp"

namespace refprice {

/// Parse-level description of a regularizer (kept symbolic so configs can be
/// round-tripped).
struct RegularizerSpec {
    std::string kind = "quadratic"; // only "quadratic" is configurable
    double scale = 1.0;

    Regularizer build() const;
};

struct ScheduleSpec {
    std::string kind = "constant"; // constant | power | table
    double c = 0.0;
    double eta = 0.0;
    double offset = 0.0;
    std::vector<double> values;

    StepSchedule build() const;
};

struct SweepAxis {
    std::string name; // a | theta_max | m
    std::vector<double> values;
};

enum class RunMode {
    simulate,
    simulate_induced,
    best_response,
    sne,
    const_region,
    rate_constant,
    sweep,
};

std::string to_string(RunMode mode);
RunMode mode_from_string(const std::string& s);

/// One experiment: a market, the players' learning configuration, and what
/// to do with them. Loaded from a single JSON file; every numeric field is
/// validated on load with field-level messages.
struct ExperimentConfig {
    RunMode mode = RunMode::simulate;

    // market
    std::array<double, 2> alpha{}, beta{}, delta{}, gamma{}, theta{};
    double a = 0.0;
    double p_lo = 0.0, p_hi = 0.0;
    std::optional<double> m_explicit;

    std::array<RegularizerSpec, 2> regularizers{};
    std::optional<RegularizerSpec> nature_regularizer;
    std::optional<std::array<ScheduleSpec, 2>> schedules;
    std::optional<ScheduleSpec> nature_schedule;

    std::optional<std::array<double, 3>> init; // p1, p2, r; argmin start otherwise
    double r1 = 0.0;                           // initial reference (best-response / argmin init)
    bool has_initial_state = false;
    long horizon = 1;

    DiagnosticsOptions diagnostics;
    double fit_tail_fraction = 0.5;

    // const-region
    std::array<double, 2> sigma{1.0, 1.0};
    // rate-constant
    std::optional<double> theta_bar; // default (1 + max theta)/2
    long horizon_guard = 1000000;

    // sweep
    std::string sweep_quantity; // rate-constant-c | sigma0
    std::vector<SweepAxis> sweep_axes;

    // output file names, relative to the output directory
    std::string trajectory_csv = "trajectory.csv";
    std::string report_txt = "report.txt";
    std::string matrix_csv = "matrix.csv";

    MarketParams market() const;
};

/// Loads and validates a config. Throws ConfigError with a field-naming
/// message on parse failures or invariant violations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string dump_config(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Re-checks the referential requirements of the (possibly new) mode: dynamic
/// modes need schedules/initial state, sweep mode needs axes.
void validate_mode_requirements(const ExperimentConfig& cfg);

/// Switches the config's mode (the CLI subcommand overrides the declared
/// default) and validates the new mode's requirements.
void set_mode(ExperimentConfig& cfg, RunMode mode);

struct RunOptions {
    std::string out_dir = ".";
    std::optional<long> horizon_override;
    bool quiet = false;
};

/// Executes the experiment, writing the trajectory CSV, verdict report
/// and/or sweep matrix into out_dir. Returns the process exit status:
/// 0 on success, 3 on runtime/I-O failure. Infeasibility and
/// non-convergence are report contents, not failures.
int run(const ExperimentConfig& cfg, const RunOptions& opts);

/// Trajectory CSV with header t,p1,p2,r,y1,y2,g1,g2,gn,d1,d2,rev1,rev2,x_t,x_n_t;
/// numbers carry 17 significant digits so values round-trip bit-exactly.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const DistanceSeries& dist);

} // namespace refprice
