#include "cli/config.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace jcloss::cli {

using nlohmann::ordered_json;

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Evolve: return "evolve";
        case Mode::Sweep: return "sweep";
        case Mode::Regime: return "regime";
        case Mode::Params: return "params";
        default: return "ns-min";
    }
}

const char* to_string(Engine e) {
    switch (e) {
        case Engine::Master: return "master";
        case Engine::Bloch: return "bloch";
        case Engine::Manifold: return "manifold";
        case Engine::Analytic: return "analytic";
        default: return "all";
    }
}

namespace {

Mode parse_mode(const std::string& s) {
    if (s == "evolve") return Mode::Evolve;
    if (s == "sweep") return Mode::Sweep;
    if (s == "regime") return Mode::Regime;
    if (s == "params") return Mode::Params;
    if (s == "ns-min" || s == "nsmin") return Mode::NsMin;
    throw ConfigError("mode: unknown value '" + s + "'");
}

Engine parse_engine(const std::string& s) {
    if (s == "master") return Engine::Master;
    if (s == "bloch") return Engine::Bloch;
    if (s == "manifold") return Engine::Manifold;
    if (s == "analytic") return Engine::Analytic;
    if (s == "all") return Engine::All;
    throw ConfigError("engine: unknown value '" + s + "'");
}

double parse_num(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse number '" + s + "'");
    }
}

int parse_int(const std::string& key, const std::string& s) {
    const double v = parse_num(key, s);
    if (v != std::floor(v)) throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return static_cast<int>(v);
}

bool is_inf(const std::string& s) {
    return s == "inf" || s == "infinity" || s == "none";
}

// Figure recipes: caption parameter sets of the reproduced plots. Keys the
// user already set are left alone.
void apply_recipe(const std::string& fig, std::map<std::string, std::string>& kv) {
    auto put = [&kv](const char* k, const std::string& v) {
        if (!kv.count(k)) kv[k] = v;
    };
    const bool weak_set = (fig == "fig1" || fig == "fig2" || fig == "fig3" || fig == "fig4");
    if (weak_set || fig == "fig7" || fig == "fig8") {
        put("mode", "evolve");
        put("engine", "all");
        put("T1", "1");
        put("T2", "0.2");
        put("omega", "1");
        if (fig == "fig1" || fig == "fig2") {
            put("g", "0.2");
            put("n0", "3");
            put("t_end", "250");
            put("samples", "5001");
        } else if (fig == "fig3" || fig == "fig4") {
            put("g", "0.2");
            put("n0", "500");
            put("t_end", "1100");
            put("samples", "4401");
            put("fock_cutoff", "650");
            put("method", "rk4");
            put("fixed_dt", "0.25");
        } else {
            put("g", "10");
            put("n0", "0.005");
            put("t_end", "4");
            put("samples", "2675");
        }
    } else if (fig == "fig5" || fig == "fig6") {
        put("mode", "sweep");
        put("engine", "master");
        put("T1", "1");
        put("T2", "0.2");
        put("omega", "1");
    } else {
        throw ConfigError("fig: unknown recipe '" + fig + "' (expected fig1..fig8)");
    }
}

}  // namespace

std::map<std::string, std::string> parse_kv(const std::string& raw) {
    std::map<std::string, std::string> kv;
    std::istringstream in(raw);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value, got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string val = trim(stripped.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        kv[key] = val;
    }
    return kv;
}

RunConfig validate_config(const std::string& raw) {
    return config_from_map(parse_kv(raw));
}

RunConfig config_from_map(std::map<std::string, std::string> kv) {
    RunConfig cfg;
    if (kv.count("fig")) {
        cfg.fig = kv.at("fig");
        apply_recipe(*cfg.fig, kv);
    }
    if (kv.count("mode")) cfg.mode = parse_mode(kv.at("mode"));
    if (kv.count("engine")) cfg.engine = parse_engine(kv.at("engine"));
    if (cfg.engine == Engine::All && cfg.mode != Mode::Evolve)
        throw ConfigError("engine: 'all' is only valid with mode = evolve");

    // --- model parameters ---
    if (kv.count("g")) cfg.model.g = parse_num("g", kv.at("g"));
    if (kv.count("T1")) cfg.model.T1 = parse_num("T1", kv.at("T1"));
    if (kv.count("omega")) cfg.model.omega = parse_num("omega", kv.at("omega"));
    if (kv.count("n0")) cfg.model.n0 = parse_num("n0", kv.at("n0"));

    const bool has_tphi = kv.count("Tphi") && !is_inf(kv.at("Tphi"));
    const bool tphi_inf = kv.count("Tphi") && is_inf(kv.at("Tphi"));
    if (has_tphi) cfg.model.Tphi = parse_num("Tphi", kv.at("Tphi"));
    if (kv.count("T2")) {
        const double T2 = parse_num("T2", kv.at("T2"));
        const auto solved = ModelParams::tphi_from_T2(cfg.model.T1, T2);
        if (has_tphi) {
            // Both given: they must agree through 1/T2 = 1/(2T1) + 1/Tphi.
            const double t2_from_tphi =
                1.0 / (1.0 / (2.0 * cfg.model.T1) + 1.0 / *cfg.model.Tphi);
            if (std::abs(t2_from_tphi - T2) > 1e-6 * T2)
                throw ConfigError("T2: inconsistent with Tphi (T2 from Tphi = " +
                                  std::to_string(t2_from_tphi) + ", given " +
                                  std::to_string(T2) + ")");
        } else if (tphi_inf) {
            if (std::abs(T2 - 2.0 * cfg.model.T1) > 1e-6 * T2)
                throw ConfigError("T2: inconsistent with Tphi = inf (expected 2*T1)");
            cfg.model.Tphi.reset();
        } else {
            cfg.model.Tphi = solved;
        }
    } else if (tphi_inf) {
        cfg.model.Tphi.reset();
    }
    if (kv.count("fock_cutoff"))
        cfg.model.dims = HilbertDims::with_cutoff(parse_int("fock_cutoff", kv.at("fock_cutoff")));
    cfg.model.validate();

    // --- integrator ---
    if (kv.count("t_end")) cfg.integrator.t_end = parse_num("t_end", kv.at("t_end"));
    if (kv.count("samples")) cfg.integrator.sample_count = parse_int("samples", kv.at("samples"));
    if (kv.count("rel_tol")) cfg.integrator.rel_tol = parse_num("rel_tol", kv.at("rel_tol"));
    if (kv.count("abs_tol")) cfg.integrator.abs_tol = parse_num("abs_tol", kv.at("abs_tol"));
    if (kv.count("method")) {
        const std::string m = kv.at("method");
        if (m == "adaptive")
            cfg.integrator.method = IntegratorConfig::Method::AdaptiveRK;
        else if (m == "rk4")
            cfg.integrator.method = IntegratorConfig::Method::FixedRK4;
        else
            throw ConfigError("method: expected adaptive|rk4, got '" + m + "'");
    }
    if (kv.count("fixed_dt")) cfg.integrator.fixed_dt = parse_num("fixed_dt", kv.at("fixed_dt"));
    cfg.integrator.validate();

    // --- estimator ---
    if (kv.count("estimator_method")) {
        const std::string m = kv.at("estimator_method");
        if (m == "auto")
            cfg.estimator.method = LossEstimatorConfig::Method::Auto;
        else if (m == "exponential")
            cfg.estimator.method = LossEstimatorConfig::Method::ExponentialFit;
        else if (m == "linear")
            cfg.estimator.method = LossEstimatorConfig::Method::LinearFit;
        else
            throw ConfigError("estimator_method: expected auto|exponential|linear");
    }
    if (kv.count("window_start"))
        cfg.estimator.window_start_fraction = parse_num("window_start", kv.at("window_start"));
    if (kv.count("window_end"))
        cfg.estimator.window_end_fraction = parse_num("window_end", kv.at("window_end"));
    if (kv.count("transient_skip"))
        cfg.estimator.transient_skip = parse_num("transient_skip", kv.at("transient_skip"));
    cfg.estimator.validate();

    // --- sweep / ns-min ---
    if (kv.count("n0_grid_min")) cfg.n0_grid_min = parse_num("n0_grid_min", kv.at("n0_grid_min"));
    if (kv.count("n0_grid_max")) cfg.n0_grid_max = parse_num("n0_grid_max", kv.at("n0_grid_max"));
    if (kv.count("n0_grid_points"))
        cfg.n0_grid_points = parse_int("n0_grid_points", kv.at("n0_grid_points"));
    if (!(cfg.n0_grid_min > 0.0) || !(cfg.n0_grid_max >= cfg.n0_grid_min))
        throw ConfigError("n0_grid_min/_max: need 0 < min <= max");
    if (cfg.n0_grid_points < 1) throw ConfigError("n0_grid_points: need >= 1");
    if (kv.count("ns_ratio_min")) cfg.ns_ratio_min = parse_num("ns_ratio_min", kv.at("ns_ratio_min"));
    if (kv.count("ns_ratio_max")) cfg.ns_ratio_max = parse_num("ns_ratio_max", kv.at("ns_ratio_max"));
    if (kv.count("ns_ratio_points"))
        cfg.ns_ratio_points = parse_int("ns_ratio_points", kv.at("ns_ratio_points"));
    if (kv.count("g_T1")) cfg.g_T1 = parse_num("g_T1", kv.at("g_T1"));

    // --- physical parameters (mode = params) ---
    const bool any_phys = kv.count("p") || kv.count("theta") || kv.count("Delta") ||
                          kv.count("Delta0") || kv.count("epsilon") || kv.count("V");
    if (any_phys || cfg.mode == Mode::Params) {
        const char* required[] = {"p", "theta", "Delta", "Delta0", "epsilon", "V"};
        for (const char* k : required)
            if (!kv.count(k))
                throw ConfigError(std::string(k) + ": required for physical-parameter input");
        PhysicalParams phys;
        phys.p = parse_num("p", kv.at("p"));
        phys.theta = parse_num("theta", kv.at("theta"));
        phys.Delta = parse_num("Delta", kv.at("Delta"));
        phys.Delta0 = parse_num("Delta0", kv.at("Delta0"));
        phys.epsilon = parse_num("epsilon", kv.at("epsilon"));
        phys.V = parse_num("V", kv.at("V"));
        phys.hbar = kv.count("hbar") ? parse_num("hbar", kv.at("hbar")) : 1.0;
        // omega defaults to the resonance value when not given explicitly.
        phys.omega = kv.count("omega") ? parse_num("omega", kv.at("omega"))
                                       : phys.E() / phys.hbar;
        phys.validate();
        cfg.physical = phys;
    }

    if (kv.count("out")) cfg.out = kv.at("out");
    if (kv.count("format")) {
        cfg.format = kv.at("format");
        if (cfg.format != "csv" && cfg.format != "json")
            throw ConfigError("format: expected csv|json, got '" + cfg.format + "'");
    }
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["mode"] = to_string(cfg.mode);
    j["engine"] = to_string(cfg.engine);
    if (cfg.fig) j["fig"] = *cfg.fig;
    ordered_json jm;
    jm["g"] = cfg.model.g;
    jm["T1"] = cfg.model.T1;
    jm["T2"] = cfg.model.T2();
    if (cfg.model.Tphi)
        jm["Tphi"] = *cfg.model.Tphi;
    else
        jm["Tphi"] = "inf";
    jm["omega"] = cfg.model.omega;
    jm["n0"] = cfg.model.n0;
    jm["fock_cutoff"] = cfg.model.hilbert().fock_cutoff;
    jm["fock_cutoff_explicit"] = cfg.model.dims.has_value();
    j["params"] = jm;
    if (cfg.physical) {
        ordered_json jp;
        jp["p"] = cfg.physical->p;
        jp["theta"] = cfg.physical->theta;
        jp["Delta"] = cfg.physical->Delta;
        jp["Delta0"] = cfg.physical->Delta0;
        jp["epsilon"] = cfg.physical->epsilon;
        jp["V"] = cfg.physical->V;
        jp["omega"] = cfg.physical->omega;
        jp["hbar"] = cfg.physical->hbar;
        j["physical"] = jp;
    }
    ordered_json ji;
    ji["method"] = cfg.integrator.method == IntegratorConfig::Method::AdaptiveRK ? "adaptive" : "rk4";
    ji["rel_tol"] = cfg.integrator.rel_tol;
    ji["abs_tol"] = cfg.integrator.abs_tol;
    ji["t_end"] = cfg.integrator.t_end;
    ji["samples"] = cfg.integrator.sample_count;
    ji["fixed_dt"] = cfg.integrator.fixed_dt;
    j["integrator"] = ji;
    ordered_json je;
    je["method"] = cfg.estimator.method == LossEstimatorConfig::Method::Auto ? "auto"
                   : cfg.estimator.method == LossEstimatorConfig::Method::ExponentialFit
                       ? "exponential"
                       : "linear";
    je["window_start"] = cfg.estimator.window_start_fraction;
    je["window_end"] = cfg.estimator.window_end_fraction;
    je["transient_skip"] = cfg.estimator.transient_skip;
    j["estimator"] = je;
    ordered_json js;
    js["n0_grid_min"] = cfg.n0_grid_min;
    js["n0_grid_max"] = cfg.n0_grid_max;
    js["n0_grid_points"] = cfg.n0_grid_points;
    js["ns_ratio_min"] = cfg.ns_ratio_min;
    js["ns_ratio_max"] = cfg.ns_ratio_max;
    js["ns_ratio_points"] = cfg.ns_ratio_points;
    js["g_T1"] = cfg.g_T1;
    j["sweep"] = js;
    j["out"] = cfg.out;
    j["format"] = cfg.format;
    return j.dump(2);
}

RunConfig config_from_json(const std::string& json_text) {
    ordered_json j = ordered_json::parse(json_text);
    std::map<std::string, std::string> kv;
    auto put_num = [&kv](const char* key, const ordered_json& v) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        kv[key] = os.str();
    };
    kv["mode"] = j.at("mode").get<std::string>();
    kv["engine"] = j.at("engine").get<std::string>();
    // No "fig" key on purpose: the recipe was already expanded into explicit
    // keys when this config was serialized.
    const auto& jm = j.at("params");
    put_num("g", jm.at("g"));
    put_num("T1", jm.at("T1"));
    if (jm.at("Tphi").is_string())
        kv["Tphi"] = "inf";
    else
        put_num("Tphi", jm.at("Tphi"));
    put_num("omega", jm.at("omega"));
    put_num("n0", jm.at("n0"));
    if (jm.value("fock_cutoff_explicit", false))
        kv["fock_cutoff"] = std::to_string(jm.at("fock_cutoff").get<int>());
    if (j.count("physical")) {
        const auto& jp = j.at("physical");
        put_num("p", jp.at("p"));
        put_num("theta", jp.at("theta"));
        put_num("Delta", jp.at("Delta"));
        put_num("Delta0", jp.at("Delta0"));
        put_num("epsilon", jp.at("epsilon"));
        put_num("V", jp.at("V"));
        put_num("hbar", jp.at("hbar"));
        put_num("omega", jp.at("omega"));
    }
    const auto& ji = j.at("integrator");
    kv["method"] = ji.at("method").get<std::string>();
    put_num("rel_tol", ji.at("rel_tol"));
    put_num("abs_tol", ji.at("abs_tol"));
    put_num("t_end", ji.at("t_end"));
    kv["samples"] = std::to_string(ji.at("samples").get<int>());
    put_num("fixed_dt", ji.at("fixed_dt"));
    const auto& je = j.at("estimator");
    kv["estimator_method"] = je.at("method").get<std::string>();
    put_num("window_start", je.at("window_start"));
    put_num("window_end", je.at("window_end"));
    put_num("transient_skip", je.at("transient_skip"));
    const auto& js = j.at("sweep");
    put_num("n0_grid_min", js.at("n0_grid_min"));
    put_num("n0_grid_max", js.at("n0_grid_max"));
    kv["n0_grid_points"] = std::to_string(js.at("n0_grid_points").get<int>());
    put_num("ns_ratio_min", js.at("ns_ratio_min"));
    put_num("ns_ratio_max", js.at("ns_ratio_max"));
    kv["ns_ratio_points"] = std::to_string(js.at("ns_ratio_points").get<int>());
    put_num("g_T1", js.at("g_T1"));
    kv["out"] = j.at("out").get<std::string>();
    kv["format"] = j.at("format").get<std::string>();
    if (kv["out"].empty()) kv.erase("out");
    return config_from_map(std::move(kv));
}

}  // namespace jcloss::cli
