#include <cctype>
#include <vector>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/runner.hpp"

using namespace jcloss;
using namespace jcloss::cli;

namespace {

// Shared flags, collected as key=value overrides on top of the config file.
struct FlagSet {
    std::string config_path, fig, engine, out, format, tphi, method;
    double g = 0, T1 = 0, T2 = 0, n0 = 0, omega = 0, t_end = 0, rel_tol = 0;
    int fock_cutoff = 0, samples = 0;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "flat key = value configuration file");
        app->add_option("--fig", fig, "figure recipe (fig1..fig8)");
        app->add_option("--engine", engine, "master|bloch|manifold|analytic|all");
        app->add_option("-g,--g", g, "coupling rate")->group("model");
        app->add_option("--T1", T1, "TLS relaxation time")->group("model");
        app->add_option("--T2", T2, "transverse coherence time")->group("model");
        app->add_option("--Tphi", tphi, "pure dephasing time, or 'inf'")->group("model");
        app->add_option("--n0", n0, "initial mean photon number")->group("model");
        app->add_option("--omega", omega, "resonator angular frequency")->group("model");
        app->add_option("--fock-cutoff", fock_cutoff, "Fock truncation override")->group("model");
        app->add_option("--t-end", t_end, "evolution horizon")->group("integrator");
        app->add_option("--samples", samples, "uniform sample count")->group("integrator");
        app->add_option("--rel-tol", rel_tol, "adaptive relative tolerance")->group("integrator");
        app->add_option("--method", method, "adaptive|rk4")->group("integrator");
        app->add_option("-o,--out", out, "output path (default: stdout)");
        app->add_option("--format", format, "csv|json");
    }

    void overlay(CLI::App* app, std::map<std::string, std::string>& kv) const {
        auto set = [&](const char* flag, const char* key, const std::string& v) {
            if (app->count(flag)) kv[key] = v;
        };
        auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        set("--fig", "fig", fig);
        set("--engine", "engine", engine);
        set("--g", "g", num(g));
        set("--T1", "T1", num(T1));
        set("--T2", "T2", num(T2));
        set("--Tphi", "Tphi", tphi);
        set("--n0", "n0", num(n0));
        set("--omega", "omega", num(omega));
        set("--fock-cutoff", "fock_cutoff", std::to_string(fock_cutoff));
        set("--t-end", "t_end", num(t_end));
        set("--samples", "samples", std::to_string(samples));
        set("--rel-tol", "rel_tol", num(rel_tol));
        set("--method", "method", method);
        set("--out", "out", out);
        set("--format", "format", format);
    }
};

std::map<std::string, std::string> load_config_file(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_kv(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
    // Accept single-dash spellings of the multi-letter flags (-T1 1, -n0 3).
    std::vector<std::string> args(argv, argv + argc);
    std::vector<char*> argp;
    for (auto& a : args) {
        if (a.size() > 2 && a[0] == '-' && a[1] != '-' && std::isalpha(a[1]) &&
            (std::isalnum(a[2]) || a[2] == '-'))
            a.insert(a.begin(), '-');
        argp.push_back(a.data());
    }
    argc = static_cast<int>(argp.size());
    argv = argp.data();

    CLI::App app{"Jaynes-Cummings model of resonator loss through a resonant TLS"};
    app.require_subcommand(1);

    FlagSet flags;
    std::map<const CLI::App*, const char*> modes;
    CLI::App* evolve = app.add_subcommand("evolve", "time evolution of one parameter set");
    CLI::App* sweep = app.add_subcommand("sweep", "loss tangent vs initial photon number");
    CLI::App* regime = app.add_subcommand("regime", "classify coupling and saturation");
    CLI::App* params = app.add_subcommand("params", "map physical TLS parameters to g");
    CLI::App* nsmin = app.add_subcommand("ns-min", "search the minimum strong-coupling knee");
    modes[evolve] = "evolve";
    modes[sweep] = "sweep";
    modes[regime] = "regime";
    modes[params] = "params";
    modes[nsmin] = "ns-min";
    for (auto* sub : {evolve, sweep, regime, params, nsmin}) flags.attach(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        auto kv = load_config_file(flags.config_path);
        flags.overlay(sub, kv);
        kv["mode"] = modes.at(sub);
        const RunConfig cfg = config_from_map(std::move(kv));
        return jcloss::cli::run(cfg, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
