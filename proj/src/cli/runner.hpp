#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace jcloss::cli {

struct InvariantCheck {
    std::string name;
    double residual = 0.0;
    bool pass = false;
};

// Executes the run described by cfg, writing the data table and the JSON
// metadata sidecar. Returns the process exit status (0 on success); engine
// errors map to distinct codes: 2 config, 3 truncation, 4 integrator,
// 5 estimator.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Exception -> exit code mapping shared by run() and main().
int exit_code_for(const std::exception& e);

// Time-series rows for one engine on the configured grid (evolve mode).
std::vector<ObservableRecord> evolve_with_engine(Engine engine, const RunConfig& cfg,
                                                 std::vector<InvariantCheck>* checks);

std::string csv_time_series(const std::vector<std::pair<std::string,
                            std::vector<ObservableRecord>>>& series);
std::string csv_loss_curve(const LossCurve& curve);

}  // namespace jcloss::cli
