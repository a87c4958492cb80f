#pragma once

#include <map>
#include <optional>
#include <string>

#include "jcloss/lindblad.hpp"
#include "jcloss/regimes.hpp"
#include "jcloss/sweep.hpp"

namespace jcloss::cli {

enum class Mode { Evolve, Sweep, Regime, Params, NsMin };
enum class Engine { Master, Bloch, Manifold, Analytic, All };

const char* to_string(Mode m);
const char* to_string(Engine e);

struct RunConfig {
    Mode mode = Mode::Evolve;
    Engine engine = Engine::Master;
    std::optional<std::string> fig;  // fig1..fig8 recipe name

    ModelParams model;
    std::optional<PhysicalParams> physical;  // mode=params input
    IntegratorConfig integrator;
    LossEstimatorConfig estimator;

    // sweep grid
    double n0_grid_min = 1e-2;
    double n0_grid_max = 1e3;
    int n0_grid_points = 24;

    // ns-min search
    double ns_ratio_min = 0.5;
    double ns_ratio_max = 8.0;
    int ns_ratio_points = 5;
    double g_T1 = 50.0;

    std::string out = "";  // empty: stdout (csv) / pretty print
    std::string format = "csv";
};

// Flat key = value configuration text (, '#' comments). Later keys override
// earlier ones. validate_config applies figure recipes for keys the user did
// not set, cross-checks T1/T2/Tphi consistency, and enforces all ModelParams
// invariants. Throws ConfigError naming the offending field.
std::map<std::string, std::string> parse_kv(const std::string& raw);
RunConfig validate_config(const std::string& raw);
RunConfig config_from_map(std::map<std::string, std::string> kv);

// JSON round-trip used by the metadata sidecar.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& json_text);

}  // namespace jcloss::cli
