#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pass/mse_solver.hpp"
#include "pass/wsr_solver.hpp"

namespace pass {

enum class Framework { MIMO, ConvPASS, SS, SA, SM };
enum class Objective { MSE, WSR };
enum class LossCase { Lossless, Lossy };

const char* framework_name(Framework f);
Framework parse_framework(const std::string& s);  // throws ConfigError
const char* objective_name(Objective o);
const char* loss_case_name(LossCase c);

struct ExperimentSpec {
    Scenario scenario;
    std::vector<Framework> frameworks{Framework::MIMO, Framework::ConvPASS, Framework::SS,
                                      Framework::SA, Framework::SM};
    Objective objective = Objective::MSE;
    std::string sweep_name = "none";  // "none" runs one point at the base scenario
    std::vector<double> sweep_values{0.0};
    int trials = 100;
    std::uint64_t seed = 1;
    LossCase loss_case = LossCase::Lossy;
    int max_iters = 100;
    double tol_rel = 1e-6;
    InfeasibilityPolicy infeasibility_policy = InfeasibilityPolicy::ClampToPower;
    int threads = 0;  // 0 picks the hardware concurrency

    void validate() const;
};

// Fields a sweep may vary.
const std::vector<std::string>& sweepable_fields();

// Scenario for one sweep point and loss case. Power fields are in dBm.
Scenario scenario_at(const ExperimentSpec& spec, double sweep_value);

struct TrialRecord {
    double mse_per_ue = 0.0;
    double mean_sinr = 0.0;  // linear, averaged over UEs
    double wsr = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct Aggregate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct PointResult {
    Framework framework;
    double sweep_value = 0.0;
    std::vector<TrialRecord> trials;
    Aggregate mse_per_ue, sinr, wsr, iterations;
    double sinr_db = 0.0;  // 10 log10 of the mean linear SINR
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<PointResult> points;  // framework-major, sweep values in order
};

std::vector<UePosition> draw_ues(const Scenario& sc, std::uint64_t seed, std::uint64_t trial);

// Fixed array of M antennas at the segment feed points, free-space only.
ChannelSet baseline_mimo(const Scenario& sc, const std::vector<UePosition>& ues);

// Receive-space channel and scenario a framework is solved on.
struct FrameworkInstance {
    Scenario scenario;
    EffectiveChannel eff;
};

FrameworkInstance build_instance(Framework f, const Scenario& sc,
                                 const std::vector<UePosition>& ues);

SolverConfig solver_config_for(const ExperimentSpec& spec, const Scenario& sc);

// AO-WMMSE from the default start and from one start per UE that favors
// it; the run with the highest final WSR wins.
SolverReport solve_wsr(const EffectiveChannel& eff, const Scenario& sc, const SolverConfig& cfg);

TrialRecord run_trial(Framework f, Objective obj, const Scenario& sc,
                      const std::vector<UePosition>& ues, const SolverConfig& cfg);

ExperimentResult run_experiment(const ExperimentSpec& spec);

// Loads a flat key = value config; unknown keys raise ConfigError.
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec(const std::string& text);

struct CsvRow {
    std::string framework, sweep_name;
    double sweep_value = 0.0;
    std::string metric_name;
    double mean = 0.0, stderr_ = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
};

std::vector<CsvRow> csv_rows(const ExperimentResult& result);
void emit_csv(const ExperimentResult& result, const std::string& path);
std::string format_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> read_csv(const std::string& path);

}  // namespace pass
