#pragma once

#include "phoclone/cli/config.hpp"
#include "phoclone/cli/result_table.hpp"

namespace phoclone::cli {

struct RunContext {
    int threads = 1;
};

ResultTable cmd_effparams(const RunConfig& c, const RunContext& ctx = {});
ResultTable cmd_gate_fidelity(const RunConfig& c, const RunContext& ctx = {});
ResultTable cmd_sweep_kappa_nth(const RunConfig& c, const RunContext& ctx = {});
ResultTable cmd_transmission(const RunConfig& c, const RunContext& ctx = {});
ResultTable cmd_clone(const RunConfig& c, const RunContext& ctx = {});
ResultTable cmd_compare_wom(const RunConfig& c, const RunContext& ctx = {});
ResultTable cmd_mean_field(const RunConfig& c, const RunContext& ctx = {});

ResultTable run_command(const RunConfig& c, const RunContext& ctx = {});

} // namespace phoclone::cli
