// SPDX-License-Identifier: Apache-2.0
#include "planrl/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "planrl/errors.hpp"
#include "planrl/shaping.hpp"

namespace planrl {

LogAggregates aggregate_rollouts(const std::vector<Rollout>& rollouts) {
    LogAggregates agg;
    agg.n_rollouts = static_cast<int>(rollouts.size());
    if (rollouts.empty()) return agg;

    double reward_sum = 0.0, tool_sum = 0.0;
    double planning_sum = 0.0, other_sum = 0.0;
    long planning_n = 0, other_n = 0;
    int zero = 0, half = 0, full = 0;
    for (const Rollout& r : rollouts) {
        reward_sum += r.reward;
        if (r.reward == 0.0) ++zero;
        else if (r.reward == 0.5) ++half;
        else if (r.reward == 1.0) ++full;
        tool_sum += tool_call_count(r);
        for (std::size_t t = 0; t < r.per_token.size(); ++t) {
            if (!r.per_token.loss_mask[t]) continue;
            if (r.per_token.stage[t] == Stage::Planning) {
                planning_sum += r.per_token.entropy[t];
                ++planning_n;
            } else {
                other_sum += r.per_token.entropy[t];
                ++other_n;
            }
        }
    }
    const double n = static_cast<double>(rollouts.size());
    agg.mean_reward = reward_sum / n;
    agg.frac_zero = zero / n;
    agg.frac_half = half / n;
    agg.frac_full = full / n;
    agg.planning_entropy = planning_n ? planning_sum / static_cast<double>(planning_n) : 0.0;
    agg.other_entropy = other_n ? other_sum / static_cast<double>(other_n) : 0.0;
    agg.mean_tool_calls = tool_sum / n;
    return agg;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string metrics_csv_header() {
    return "step,mean_reward,frac_reward_0,frac_reward_half,frac_reward_1,"
           "planning_entropy,other_entropy,mean_tool_calls,mean_psi_over_abs_adv,"
           "selected_fraction";
}

std::string metrics_csv_row(const StepMetrics& m) {
    std::ostringstream row;
    row << m.step << ',' << format_double(m.mean_reward) << ',' << format_double(m.frac_zero)
        << ',' << format_double(m.frac_half) << ',' << format_double(m.frac_full) << ','
        << format_double(m.planning_entropy) << ',' << format_double(m.other_entropy) << ','
        << format_double(m.mean_tool_calls) << ',' << format_double(m.mean_psi_ratio) << ','
        << format_double(m.selected_fraction);
    return row.str();
}

void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& metrics) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_metrics_csv: cannot open " + path);
    out << metrics_csv_header() << "\n";
    for (const StepMetrics& m : metrics) out << metrics_csv_row(m) << "\n";
    if (!out) throw DataError("write_metrics_csv: failed writing " + path);
}

std::vector<StepMetrics> read_metrics_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_metrics_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != metrics_csv_header()) {
        throw DataError("read_metrics_csv: unexpected header in " + path);
    }
    std::vector<StepMetrics> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        StepMetrics m;
        std::istringstream row(line);
        std::string cell;
        double* fields[] = {&m.mean_reward,      &m.frac_zero,     &m.frac_half,
                            &m.frac_full,        &m.planning_entropy, &m.other_entropy,
                            &m.mean_tool_calls,  &m.mean_psi_ratio,   &m.selected_fraction};
        if (!std::getline(row, cell, ',')) {
            throw DataError("read_metrics_csv: short row at line " + std::to_string(line_no));
        }
        m.step = std::stoi(cell);
        for (double* field : fields) {
            if (!std::getline(row, cell, ',')) {
                throw DataError("read_metrics_csv: short row at line " + std::to_string(line_no));
            }
            *field = std::strtod(cell.c_str(), nullptr);
        }
        out.push_back(m);
    }
    return out;
}

} // namespace planrl
