#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pass/errors.hpp"
#include "pass/experiment.hpp"

namespace pass {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

struct Value {
    std::string key;
    int line = 0;
    bool is_array = false;
    std::vector<std::string> items;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(key + " (line " + std::to_string(line) + "): " + why);
    }

    const std::string& scalar() const {
        if (is_array || items.size() != 1) fail("expected a single value");
        return items.front();
    }

    static double to_double(const Value& v, const std::string& s) {
        double out = 0.0;
        const auto* end = s.data() + s.size();
        const auto r = std::from_chars(s.data(), end, out);
        if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
            v.fail("'" + s + "' is not a number");
        return out;
    }

    double number() const { return to_double(*this, scalar()); }

    long long integer() const {
        const double d = number();
        if (d != std::floor(d) || std::abs(d) > 9.0e15) fail("expected an integer");
        return static_cast<long long>(d);
    }

    std::uint64_t u64() const {
        const std::string& s = scalar();
        std::uint64_t out = 0;
        const auto* end = s.data() + s.size();
        const auto r = std::from_chars(s.data(), end, out);
        if (r.ec != std::errc() || r.ptr != end) fail("expected an unsigned 64-bit integer");
        return out;
    }

    std::vector<double> numbers() const {
        if (!is_array) fail("expected an array like [1, 2]");
        std::vector<double> out;
        for (const auto& s : items) out.push_back(to_double(*this, s));
        return out;
    }

    std::vector<std::string> words() const {
        if (!is_array) return {scalar()};
        return items;
    }
};

Value parse_value(const std::string& key, const std::string& raw, int line) {
    Value v;
    v.key = key;
    v.line = line;
    if (!raw.empty() && raw.front() == '[') {
        if (raw.back() != ']') v.fail("unterminated array");
        v.is_array = true;
        const std::string body = trim(raw.substr(1, raw.size() - 2));
        if (body.empty()) return v;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = unquote(trim(item));
            if (item.empty()) v.fail("empty array element");
            v.items.push_back(item);
        }
        return v;
    }
    if (raw.empty()) v.fail("missing value");
    v.items.push_back(unquote(raw));
    return v;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
    ExperimentSpec spec;
    Scenario& sc = spec.scenario;
    using Setter = std::function<void(const Value&)>;
    const std::map<std::string, Setter> setters{
        {"area_x", [&](const Value& v) { sc.area_x = v.number(); }},
        {"area_half_y", [&](const Value& v) { sc.area_half_y = v.number(); }},
        {"height", [&](const Value& v) { sc.height = v.number(); }},
        {"num_segments", [&](const Value& v) { sc.num_segments = static_cast<int>(v.integer()); }},
        {"feed_x", [&](const Value& v) { sc.feed_x = v.numbers(); }},
        {"carrier_freq", [&](const Value& v) { sc.carrier_freq = v.number(); }},
        {"light_speed", [&](const Value& v) { sc.light_speed = v.number(); }},
        {"n_eff", [&](const Value& v) { sc.n_eff = v.number(); }},
        {"kappa0_db_per_m", [&](const Value& v) { sc.kappa0_db_per_m = v.number(); }},
        {"min_spacing", [&](const Value& v) { sc.min_spacing = v.number(); }},
        {"num_ues", [&](const Value& v) { sc.num_ues = static_cast<int>(v.integer()); }},
        {"p_max_dbm", [&](const Value& v) { sc.p_max_watts = dbm_to_watts(v.number()); }},
        {"noise_dbm", [&](const Value& v) { sc.noise_watts = dbm_to_watts(v.number()); }},
        {"rate_min_bps_hz", [&](const Value& v) { sc.rate_min_bps_hz = v.number(); }},
        {"mse_budget", [&](const Value& v) { sc.mse_budget = v.number(); }},
        {"weights", [&](const Value& v) { sc.weights = v.numbers(); }},
        {"frameworks",
         [&](const Value& v) {
             spec.frameworks.clear();
             for (const auto& w : v.words()) spec.frameworks.push_back(parse_framework(w));
         }},
        {"objective",
         [&](const Value& v) {
             const std::string& s = v.scalar();
             if (s == "MSE") spec.objective = Objective::MSE;
             else if (s == "WSR") spec.objective = Objective::WSR;
             else v.fail("expected MSE or WSR");
         }},
        {"sweep_name", [&](const Value& v) { spec.sweep_name = v.scalar(); }},
        {"sweep_values", [&](const Value& v) { spec.sweep_values = v.numbers(); }},
        {"trials", [&](const Value& v) { spec.trials = static_cast<int>(v.integer()); }},
        {"seed", [&](const Value& v) { spec.seed = v.u64(); }},
        {"loss_case",
         [&](const Value& v) {
             const std::string& s = v.scalar();
             if (s == "CaseI_lossless") spec.loss_case = LossCase::Lossless;
             else if (s == "CaseII_lossy") spec.loss_case = LossCase::Lossy;
             else v.fail("expected CaseI_lossless or CaseII_lossy");
         }},
        {"max_iters", [&](const Value& v) { spec.max_iters = static_cast<int>(v.integer()); }},
        {"tol_rel", [&](const Value& v) { spec.tol_rel = v.number(); }},
        {"infeasibility_policy",
         [&](const Value& v) {
             const std::string& s = v.scalar();
             if (s == "Error") spec.infeasibility_policy = InfeasibilityPolicy::Error;
             else if (s == "ClampToPower")
                 spec.infeasibility_policy = InfeasibilityPolicy::ClampToPower;
             else v.fail("expected Error or ClampToPower");
         }},
        {"threads", [&](const Value& v) { spec.threads = static_cast<int>(v.integer()); }},
    };

    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(key + " (line " + std::to_string(lineno) + "): unknown key");
        if (!seen.insert(key).second)
            throw ConfigError(key + " (line " + std::to_string(lineno) + "): duplicate key");
        it->second(parse_value(key, trim(line.substr(eq + 1)), lineno));
    }
    if (spec.sweep_name == "none") spec.sweep_values = {0.0};
    else if (!seen.count("sweep_values"))
        throw ConfigError("sweep_values: required when sweep_name is set");
    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_spec(ss.str());
}

}  // namespace pass
