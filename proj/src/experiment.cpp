#include "pass/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "pass/errors.hpp"
#include "pass/rng.hpp"

namespace pass {

const char* framework_name(Framework f) {
    switch (f) {
        case Framework::MIMO: return "MIMO";
        case Framework::ConvPASS: return "ConvPASS";
        case Framework::SS: return "JCC-SS";
        case Framework::SA: return "JCC-SA";
        case Framework::SM: return "JCC-SM";
    }
    return "?";
}

Framework parse_framework(const std::string& s) {
    if (s == "MIMO") return Framework::MIMO;
    if (s == "ConvPASS") return Framework::ConvPASS;
    if (s == "JCC-SS" || s == "SS") return Framework::SS;
    if (s == "JCC-SA" || s == "SA") return Framework::SA;
    if (s == "JCC-SM" || s == "SM") return Framework::SM;
    throw ConfigError("frameworks: unknown framework '" + s + "'");
}

const char* objective_name(Objective o) { return o == Objective::MSE ? "MSE" : "WSR"; }

const char* loss_case_name(LossCase c) {
    return c == LossCase::Lossless ? "CaseI_lossless" : "CaseII_lossy";
}

const std::vector<std::string>& sweepable_fields() {
    static const std::vector<std::string> fields{"area_x",    "num_segments",    "num_ues",
                                                 "p_max_dbm", "noise_dbm",       "rate_min_bps_hz",
                                                 "height",    "kappa0_db_per_m"};
    return fields;
}

namespace {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

int as_count(double v, const std::string& field) {
    if (v != std::floor(v) || v < 1) throw ConfigError(field + ": sweep value must be a positive integer");
    return static_cast<int>(v);
}

Aggregate aggregate(const std::vector<double>& xs) {
    Aggregate a;
    const double n = static_cast<double>(xs.size());
    if (xs.empty()) return a;
    for (double x : xs) a.mean += x;
    a.mean /= n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.stderr_ = std::sqrt(ss / (n - 1) / n);
    }
    return a;
}

}  // namespace

Scenario scenario_at(const ExperimentSpec& spec, double value) {
    Scenario sc = spec.scenario;
    const std::string& f = spec.sweep_name;
    if (f == "area_x") sc.area_x = value;
    else if (f == "num_segments") sc.num_segments = as_count(value, f);
    else if (f == "num_ues") sc.num_ues = as_count(value, f);
    else if (f == "p_max_dbm") sc.p_max_watts = dbm_to_watts(value);
    else if (f == "noise_dbm") sc.noise_watts = dbm_to_watts(value);
    else if (f == "rate_min_bps_hz") sc.rate_min_bps_hz = value;
    else if (f == "height") sc.height = value;
    else if (f == "kappa0_db_per_m") sc.kappa0_db_per_m = value;
    else if (f != "none") throw ConfigError("sweep_name: '" + f + "' cannot be swept");
    if (spec.loss_case == LossCase::Lossless) sc.kappa0_db_per_m = 0.0;
    return sc;
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw ConfigError("trials: must be at least 1");
    if (frameworks.empty()) throw ConfigError("frameworks: list is empty");
    if (max_iters < 1) throw ConfigError("max_iters: must be at least 1");
    if (!(tol_rel > 0)) throw ConfigError("tol_rel: must be positive");
    if (threads < 0) throw ConfigError("threads: must be nonnegative");
    const auto& fields = sweepable_fields();
    if (sweep_name != "none" &&
        std::find(fields.begin(), fields.end(), sweep_name) == fields.end())
        throw ConfigError("sweep_name: '" + sweep_name + "' cannot be swept");
    scenario.validate();
    for (double v : sweep_values) scenario_at(*this, v).validate();
}

std::vector<UePosition> draw_ues(const Scenario& sc, std::uint64_t seed, std::uint64_t trial) {
    Stream s(trial_seed(seed, trial));
    std::vector<UePosition> ues(static_cast<size_t>(sc.num_ues));
    for (auto& ue : ues) {
        ue.x = s.uniform(0.0, sc.area_x);
        ue.y = s.uniform(0.0, 2 * sc.area_half_y);
    }
    return ues;
}

ChannelSet baseline_mimo(const Scenario& sc, const std::vector<UePosition>& ues) {
    ChannelSet h(static_cast<Eigen::Index>(ues.size()), sc.num_segments);
    for (size_t k = 0; k < ues.size(); ++k)
        for (int m = 0; m < sc.num_segments; ++m)
            h(static_cast<Eigen::Index>(k), m) = free_space_channel(ues[k], sc.feed(m), sc);
    return h;
}

FrameworkInstance build_instance(Framework f, const Scenario& sc,
                                 const std::vector<UePosition>& ues) {
    FrameworkInstance inst{sc, {}};
    switch (f) {
        case Framework::MIMO:
            inst.eff = effective_channel(baseline_mimo(sc, ues), {Protocol::SM, 0}, sc);
            break;
        case Framework::ConvPASS: {
            inst.scenario.num_segments = 1;
            inst.scenario.feed_x.clear();
            const ChannelSet h =
                composite_channel(ues, place_pas(ues, inst.scenario), inst.scenario);
            inst.eff = effective_channel(h, {Protocol::SS, 0}, inst.scenario);
            break;
        }
        case Framework::SS:
        case Framework::SA:
        case Framework::SM: {
            const ChannelSet h = composite_channel(ues, place_pas(ues, sc), sc);
            const Protocol p = f == Framework::SS   ? Protocol::SS
                               : f == Framework::SA ? Protocol::SA
                                                    : Protocol::SM;
            inst.eff = effective_channel(h, {p, strongest_segment(h)}, sc);
            break;
        }
    }
    return inst;
}

SolverConfig solver_config_for(const ExperimentSpec& spec, const Scenario& sc) {
    SolverConfig cfg = default_solver_config(sc);
    cfg.max_iters = spec.max_iters;
    cfg.tol_rel = spec.tol_rel;
    cfg.infeasibility_policy = spec.infeasibility_policy;
    return cfg;
}

SolverReport solve_wsr(const EffectiveChannel& eff, const Scenario& sc, const SolverConfig& cfg) {
    SolverReport best = ao_wmmse(initial_beams(eff, sc), eff, sc, cfg);
    const int K = eff.users();
    if (K == 1) return best;
    for (int favored = 0; favored < K; ++favored) {
        BeamState start = initial_beams(eff, sc);
        for (int k = 0; k < K; ++k) {
            const cplx rot = start.v(k) / std::abs(start.v(k));
            start.w(k) = 0.0;
            const double power = k == favored ? sc.p_max_watts : 1e-3 * sc.p_max_watts;
            start.v(k) = std::sqrt(power) * rot;
        }
        SolverReport rep = ao_wmmse(start, eff, sc, cfg);
        if (rep.wsr_trace.back() > best.wsr_trace.back()) best = std::move(rep);
    }
    return best;
}

TrialRecord run_trial(Framework f, Objective obj, const Scenario& sc,
                      const std::vector<UePosition>& ues, const SolverConfig& cfg) {
    const FrameworkInstance inst = build_instance(f, sc, ues);
    const SolverReport rep = obj == Objective::MSE
                                 ? ao_mmse(initial_beams(inst.eff, inst.scenario), inst.eff,
                                           inst.scenario, cfg)
                                 : solve_wsr(inst.eff, inst.scenario, cfg);
    const Metrics m = evaluate(rep.final_beams, inst.eff, inst.scenario);
    TrialRecord rec;
    rec.mse_per_ue = m.mse / sc.num_ues;
    rec.mean_sinr = m.sinr.mean();
    rec.wsr = m.wsr;
    rec.iterations = rep.iterations_used;
    rec.converged = rep.converged;
    return rec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    result.spec = spec;
    const size_t nf = spec.frameworks.size();
    const size_t np = spec.sweep_values.size();
    const size_t nt = static_cast<size_t>(spec.trials);
    for (Framework f : spec.frameworks)
        for (double v : spec.sweep_values) {
            PointResult pr;
            pr.framework = f;
            pr.sweep_value = v;
            pr.trials.resize(nt);
            result.points.push_back(std::move(pr));
        }

    std::vector<Scenario> scenarios;
    std::vector<SolverConfig> configs;
    for (double v : spec.sweep_values) {
        scenarios.push_back(scenario_at(spec, v));
        configs.push_back(solver_config_for(spec, scenarios.back()));
    }

    // One job per (sweep point, trial); every framework sees the same UEs.
    const size_t jobs = np * nt;
    std::vector<std::exception_ptr> errors(jobs);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t j = next++; j < jobs; j = next++) {
            const size_t p = j / nt, t = j % nt;
            try {
                const auto ues = draw_ues(scenarios[p], spec.seed, t);
                for (size_t f = 0; f < nf; ++f)
                    result.points[f * np + p].trials[t] =
                        run_trial(spec.frameworks[f], spec.objective, scenarios[p], ues, configs[p]);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    unsigned n = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<size_t>(n, std::max<size_t>(jobs, 1)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (auto& pr : result.points) {
        std::vector<double> mse, sinr, wsr, its;
        for (const auto& r : pr.trials) {
            mse.push_back(r.mse_per_ue);
            sinr.push_back(r.mean_sinr);
            wsr.push_back(r.wsr);
            its.push_back(r.iterations);
        }
        pr.mse_per_ue = aggregate(mse);
        pr.sinr = aggregate(sinr);
        pr.wsr = aggregate(wsr);
        pr.iterations = aggregate(its);
        pr.sinr_db = 10 * std::log10(pr.sinr.mean);
    }
    return result;
}

}  // namespace pass
