// Command-line front end: Monte Carlo runs, gain tables, convergence traces.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pass/errors.hpp"
#include "pass/experiment.hpp"

using namespace pass;

namespace {

// Accepts "8", "1,2,4" or "1..8".
std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const long lo = std::stol(text.substr(0, dots));
            const long hi = std::stol(text.substr(dots + 2));
            if (hi < lo) throw ConfigError(flag + ": empty range '" + text + "'");
            for (long v = lo; v <= hi; ++v) out.push_back(static_cast<double>(v));
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        }
    } catch (const std::logic_error&) {
        throw ConfigError(flag + ": cannot parse '" + text + "'");
    }
    if (out.empty()) throw ConfigError(flag + ": no values");
    return out;
}

// A single value overrides the base scenario; several values become the sweep.
void apply_axis(ExperimentSpec& spec, const std::string& text, const std::string& flag,
                const std::string& field) {
    const auto values = parse_list(text, flag);
    if (values.size() == 1) {
        if (field == "num_segments") {
            if (values[0] != std::floor(values[0]) || values[0] < 1)
                throw ConfigError(flag + ": must be a positive integer");
            spec.scenario.num_segments = static_cast<int>(values[0]);
        } else {
            spec.scenario.area_x = values[0];
        }
        spec.scenario.feed_x.clear();
        return;
    }
    if (spec.sweep_name != "none" && spec.sweep_name != field)
        throw ConfigError(flag + ": config already sweeps " + spec.sweep_name);
    spec.sweep_name = field;
    spec.sweep_values = values;
    spec.scenario.feed_x.clear();
}

struct RunArgs {
    std::string config, out, segments, length, protocol, objective, loss_case;
    std::uint64_t seed = 0;
    int trials = 0;
    int threads = -1;
    bool seed_set = false;
};

ExperimentSpec build_spec(const RunArgs& a) {
    ExperimentSpec spec = a.config.empty() ? ExperimentSpec{} : load_spec(a.config);
    if (a.seed_set) spec.seed = a.seed;
    if (a.trials > 0) spec.trials = a.trials;
    if (a.threads >= 0) spec.threads = a.threads;
    if (!a.segments.empty()) apply_axis(spec, a.segments, "--segments", "num_segments");
    if (!a.length.empty()) apply_axis(spec, a.length, "--length", "area_x");
    if (!a.protocol.empty()) {
        spec.frameworks.clear();
        std::stringstream ss(a.protocol);
        std::string item;
        while (std::getline(ss, item, ',')) spec.frameworks.push_back(parse_framework(item));
    }
    if (!a.objective.empty()) {
        if (a.objective == "MSE") spec.objective = Objective::MSE;
        else if (a.objective == "WSR") spec.objective = Objective::WSR;
        else throw ConfigError("--objective: expected MSE or WSR");
    }
    if (!a.loss_case.empty()) {
        if (a.loss_case == "CaseI_lossless") spec.loss_case = LossCase::Lossless;
        else if (a.loss_case == "CaseII_lossy") spec.loss_case = LossCase::Lossy;
        else throw ConfigError("--loss-case: expected CaseI_lossless or CaseII_lossy");
    }
    spec.validate();
    return spec;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("--config", a.config, "config file (key = value)");
    cmd->add_option("--seed", a.seed, "64-bit seed")->each([&](const std::string&) { a.seed_set = true; });
    cmd->add_option("--segments", a.segments, "segment count, list or range like 1..8");
    cmd->add_option("--length", a.length, "waveguide length in meters, or a list");
    cmd->add_option("--protocol", a.protocol, "comma list: MIMO,ConvPASS,JCC-SS,JCC-SA,JCC-SM");
    cmd->add_option("--objective", a.objective, "MSE or WSR");
    cmd->add_option("--loss-case", a.loss_case, "CaseI_lossless or CaseII_lossy");
    cmd->add_option("--threads", a.threads, "worker threads, 0 for all cores");
}

std::ostream* open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return &std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw IoError("cannot write '" + path + "'");
    return &file;
}

int cmd_run(const RunArgs& a) {
    const ExperimentSpec spec = build_spec(a);
    const ExperimentResult res = run_experiment(spec);
    if (a.out == "-")
        std::cout << format_csv(csv_rows(res));
    else
        emit_csv(res, a.out);
    return 0;
}

int cmd_gain(double alpha, double kappa0, double length, const std::string& segments,
             const std::string& out) {
    if (alpha < 0) alpha = kappa0 * std::log(10.0) / 20.0;
    if (!(alpha >= 0)) throw ConfigError("--alpha: must be nonnegative");
    if (!(length > 0)) throw ConfigError("--length: must be positive");
    std::ofstream file;
    std::ostream& os = *open_out(out, file);
    os << "segments,avg_gain_segmented,avg_gain_conventional,gain_ratio\n";
    for (double m : parse_list(segments, "--segments")) {
        if (m != std::floor(m) || m < 1) throw ConfigError("--segments: must be positive integers");
        const int M = static_cast<int>(m);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", M, avg_power_gain(alpha, length / M),
                      avg_power_gain(alpha, length), gain_ratio(alpha, length, M));
        os << buf;
    }
    return 0;
}

int cmd_converge(const RunArgs& a, int trial, const std::string& out) {
    const ExperimentSpec spec = build_spec(a);
    std::ofstream file;
    std::ostream& os = *open_out(out, file);
    os << "framework,sweep_value,iteration,metric,value\n";
    for (double v : spec.sweep_values) {
        const Scenario sc = scenario_at(spec, v);
        const auto ues = draw_ues(sc, spec.seed, static_cast<std::uint64_t>(trial));
        const SolverConfig cfg = solver_config_for(spec, sc);
        for (Framework f : spec.frameworks) {
            const FrameworkInstance inst = build_instance(f, sc, ues);
            const BeamState init = initial_beams(inst.eff, inst.scenario);
            const bool mse = spec.objective == Objective::MSE;
            const SolverReport rep = mse ? ao_mmse(init, inst.eff, inst.scenario, cfg)
                                         : ao_wmmse(init, inst.eff, inst.scenario, cfg);
            auto emit = [&](const char* metric, const std::vector<double>& xs) {
                for (size_t i = 0; i < xs.size(); ++i) {
                    char buf[200];
                    std::snprintf(buf, sizeof buf, "%s,%.17g,%zu,%s,%.17g\n", framework_name(f), v,
                                  i + 1, metric, xs[i]);
                    os << buf;
                }
            };
            if (mse) {
                std::vector<double> per_ue;
                for (double m : rep.mse_trace) per_ue.push_back(m / sc.num_ues);
                emit("mse_per_ue", per_ue);
            } else {
                emit("wsr", rep.wsr_trace);
                emit("wmmse_objective", rep.objective_trace);
            }
            std::vector<double> sinr;
            for (const auto& s : rep.sinr_trace) sinr.push_back(s.mean());
            emit("mean_sinr", sinr);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segmented pinching-antenna joint communication and computation simulator"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Monte Carlo experiment, CSV output");
    add_run_options(run, run_args);
    run->add_option("--trials", run_args.trials, "number of trials");
    run->add_option("--out", run_args.out, "CSV output path, - for stdout")->required();

    double alpha = -1.0, kappa0 = 0.08, glength = 20.0;
    std::string gsegments = "1..8", gout;
    auto* gain = app.add_subcommand("gain", "average in-waveguide gain table over segment counts");
    gain->add_option("--alpha", alpha, "attenuation per meter (natural log, amplitude)");
    gain->add_option("--kappa0", kappa0, "loss in dB/m, used when --alpha is absent");
    gain->add_option("--length", glength, "waveguide length in meters");
    gain->add_option("--segments", gsegments, "segment counts: list or range like 1..8");
    gain->add_option("--out", gout, "output path, stdout when absent");

    RunArgs conv_args;
    int conv_trial = 0;
    std::string conv_out;
    auto* conv = app.add_subcommand("converge", "per-iteration solver traces for one trial");
    add_run_options(conv, conv_args);
    conv->add_option("--trial", conv_trial, "trial index whose UE draw is used");
    conv->add_option("--out", conv_out, "output path, stdout when absent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(run_args);
        if (*gain) return cmd_gain(alpha, kappa0, glength, gsegments, gout);
        if (*conv) return cmd_converge(conv_args, conv_trial, conv_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
