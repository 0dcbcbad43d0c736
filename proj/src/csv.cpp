#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pass/errors.hpp"
#include "pass/experiment.hpp"

namespace pass {

namespace {

const char* kHeader = "framework,sweep_name,sweep_value,metric_name,mean,stderr,trials,seed";

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::vector<CsvRow> csv_rows(const ExperimentResult& result) {
    std::vector<CsvRow> rows;
    const auto& spec = result.spec;
    for (const auto& pr : result.points) {
        auto add = [&](const char* metric, double mean, double se) {
            rows.push_back({framework_name(pr.framework), spec.sweep_name, pr.sweep_value, metric,
                            mean, se, spec.trials, spec.seed});
        };
        add("mse_per_ue", pr.mse_per_ue.mean, pr.mse_per_ue.stderr_);
        add("sinr_linear", pr.sinr.mean, pr.sinr.stderr_);
        // Delta-method standard error of the dB value.
        const double db_se = pr.sinr.mean > 0 ? 10 / std::log(10.0) * pr.sinr.stderr_ / pr.sinr.mean : 0.0;
        add("sinr_db", pr.sinr_db, db_se);
        add("wsr", pr.wsr.mean, pr.wsr.stderr_);
        add("iterations", pr.iterations.mean, pr.iterations.stderr_);
    }
    return rows;
}

std::string format_csv(const std::vector<CsvRow>& rows) {
    std::string out = kHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.framework + ',' + r.sweep_name + ',' + num(r.sweep_value) + ',' + r.metric_name +
               ',' + num(r.mean) + ',' + num(r.stderr_) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.seed) + '\n';
    }
    return out;
}

void emit_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << format_csv(csv_rows(result));
    if (!f) throw IoError("write to '" + path + "' failed");
}

std::vector<CsvRow> read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || line != kHeader) throw IoError("unexpected CSV header");
    std::vector<CsvRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 8) throw IoError("malformed CSV row: " + line);
        CsvRow r;
        r.framework = cells[0];
        r.sweep_name = cells[1];
        r.sweep_value = std::strtod(cells[2].c_str(), nullptr);
        r.metric_name = cells[3];
        r.mean = std::strtod(cells[4].c_str(), nullptr);
        r.stderr_ = std::strtod(cells[5].c_str(), nullptr);
        r.trials = std::stoi(cells[6]);
        r.seed = std::stoull(cells[7]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace pass
