#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/config.hpp"
#include <json.hpp>

#include "cli/runner.hpp"

using namespace jcloss;
using namespace jcloss::cli;

TEST_CASE("config parsing: key = value documents") {
    const auto kv = parse_kv("# comment\n g = 0.5 \nT1=2\n\nout = run.csv # trailing\n");
    CHECK(kv.at("g") == "0.5");
    CHECK(kv.at("T1") == "2");
    CHECK(kv.at("out") == "run.csv");
    CHECK_THROWS_AS(parse_kv("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_kv("key =\n"), ConfigError);
}

TEST_CASE("validate_config: T1/T2/Tphi consistency") {
    SUBCASE("Tphi = 2/9 gives T2 = 0.2") {
        const auto cfg = validate_config("T1 = 1\nTphi = 0.22222222222222222\n");
        CHECK(cfg.model.T2() == doctest::Approx(0.2).epsilon(1e-9));
    }
    SUBCASE("Tphi = inf gives T2 = 2 T1") {
        const auto cfg = validate_config("T1 = 1\nTphi = inf\n");
        CHECK(!cfg.model.Tphi.has_value());
        CHECK(cfg.model.T2() == doctest::Approx(2.0));
    }
    SUBCASE("T2 above the bound is rejected") {
        CHECK_THROWS_AS(validate_config("T1 = 1\nT2 = 3\n"), ConfigError);
    }
    SUBCASE("T2 back-solves Tphi") {
        const auto cfg = validate_config("T1 = 1\nT2 = 0.2\n");
        CHECK(*cfg.model.Tphi == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    }
    SUBCASE("inconsistent pair is rejected with a field name") {
        try {
            validate_config("T1 = 1\nT2 = 0.2\nTphi = 1\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("T2") != std::string::npos);
        }
    }
    SUBCASE("consistent pair is accepted") {
        const auto cfg = validate_config("T1 = 1\nT2 = 0.2\nTphi = 0.2222222222\n");
        CHECK(cfg.model.T2() == doctest::Approx(0.2));
    }
}

TEST_CASE("validate_config: modes, engines and recipes") {
    CHECK(validate_config("mode = regime\n").mode == Mode::Regime);
    CHECK_THROWS_AS(validate_config("mode = nope\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("mode = sweep\nengine = all\n"), ConfigError);

    SUBCASE("fig1 recipe pins the caption parameters") {
        const auto cfg = validate_config("fig = fig1\n");
        CHECK(cfg.mode == Mode::Evolve);
        CHECK(cfg.engine == Engine::All);
        CHECK(cfg.model.g == doctest::Approx(0.2));
        CHECK(cfg.model.n0 == doctest::Approx(3.0));
        CHECK(cfg.integrator.t_end == doctest::Approx(250.0));
    }
    SUBCASE("fig7 recipe") {
        const auto cfg = validate_config("fig = fig7\n");
        CHECK(cfg.model.g == doctest::Approx(10.0));
        CHECK(cfg.model.n0 == doctest::Approx(0.005));
        CHECK(cfg.integrator.t_end == doctest::Approx(4.0));
    }
    SUBCASE("explicit keys override the recipe") {
        const auto cfg = validate_config("fig = fig1\nn0 = 5\n");
        CHECK(cfg.model.n0 == doctest::Approx(5.0));
    }
    SUBCASE("fig3 recipe opts into fixed-step stepping") {
        const auto cfg = validate_config("fig = fig3\n");
        CHECK(cfg.integrator.method == IntegratorConfig::Method::FixedRK4);
        CHECK(cfg.model.hilbert().fock_cutoff == 650);
    }
    SUBCASE("unknown recipe") {
        CHECK_THROWS_AS(validate_config("fig = fig9\n"), ConfigError);
    }
}

TEST_CASE("config json round-trip") {
    const char* text =
        "mode = evolve\nengine = bloch\ng = 0.7\nT1 = 1.5\nTphi = 0.4\nn0 = 2\n"
        "omega = 1.2\nt_end = 20\nsamples = 301\nrel_tol = 1e-9\nformat = json\n";
    const RunConfig cfg = validate_config(text);
    const std::string j1 = config_to_json(cfg);
    const RunConfig back = config_from_json(j1);
    const std::string j2 = config_to_json(back);
    CHECK(j1 == j2);
    CHECK(back.model.g == cfg.model.g);
    CHECK(back.model.T2() == doctest::Approx(cfg.model.T2()));
    CHECK(back.integrator.sample_count == cfg.integrator.sample_count);
    CHECK(back.engine == Engine::Bloch);
}

TEST_CASE("run: determinism and emitted invariants") {
    RunConfig cfg = validate_config(
        "mode = evolve\nengine = all\ng = 10\nT1 = 1\nT2 = 0.2\nn0 = 0.005\n"
        "t_end = 2\nsamples = 601\n");

    std::ostringstream out1, out2, err;
    CHECK(run(cfg, out1, err) == 0);
    CHECK(run(cfg, out2, err) == 0);
    CHECK(out1.str() == out2.str());  // byte-identical

    SUBCASE("csv rows satisfy the record invariants") {
        std::istringstream in(out1.str());
        std::string line;
        std::getline(in, line);
        CHECK(line ==
              "t,n,sigma_pp,re_sigma_minus,im_sigma_minus,re_corr,im_corr,trace,purity,engine");
        int rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            std::istringstream ls(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            CHECK(cells.size() == 10);
            const double n = std::stod(cells[1]);
            const double spp = std::stod(cells[2]);
            CHECK(n > -1e-8);
            CHECK(spp > -1e-9);
            CHECK(spp < 1.0 + 1e-6);
            if (!cells[7].empty())
                CHECK(std::abs(std::stod(cells[7]) - 1.0) < 1e-6);
        }
        CHECK(rows == 3 * 601);
    }
}

TEST_CASE("run: sidecar round-trips into an equivalent config") {
    const std::string dir = "/tmp/jcloss_test_out";
    std::filesystem::create_directories(dir);
    RunConfig cfg = validate_config(
        "mode = evolve\nengine = manifold\ng = 10\nT1 = 1\nT2 = 0.2\nn0 = 0.005\n"
        "t_end = 1\nsamples = 101\nout = " + dir + "/run.csv\n");
    std::ostringstream out, err;
    REQUIRE(run(cfg, out, err) == 0);

    std::ifstream meta(dir + "/run.csv.meta.json");
    REQUIRE(meta.good());
    std::stringstream ss;
    ss << meta.rdbuf();
    const RunConfig back = config_from_json(ss.str());
    CHECK(config_to_json(back) == config_to_json(cfg));

    std::ifstream data(dir + "/run.csv");
    REQUIRE(data.good());
    std::string header;
    std::getline(data, header);
    CHECK(header.substr(0, 2) == "t,");
}

TEST_CASE("run: regime and params modes") {
    std::ostringstream out, err;
    RunConfig cfg = validate_config("mode = regime\ng = 10\nT1 = 1\nT2 = 0.2\nn0 = 0.005\n");
    CHECK(run(cfg, out, err) == 0);
    CHECK(out.str().find("strong, unsaturated") != std::string::npos);

    std::ostringstream out2;
    RunConfig cfg2 = validate_config(
        "mode = params\np = 1\ntheta = 0\nDelta = 0.8\nDelta0 = 0.6\nepsilon = 1\nV = 0.5\n");
    CHECK(run(cfg2, out2, err) == 0);
    // first line: "g = <value>" at full precision
    const std::string text = out2.str();
    REQUIRE(text.substr(0, 4) == "g = ");
    const double g = std::stod(text.substr(4));
    CHECK(g == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("run: fig5 sweep stacks the weak and strong curves") {
    // Trimmed grid; the full figure range is documented as a long run.
    RunConfig cfg = validate_config(
        "fig = fig5\nn0_grid_min = 0.01\nn0_grid_max = 0.02\nn0_grid_points = 2\n");
    std::ostringstream out, err;
    REQUIRE(run(cfg, out, err) == 0);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "n0,R0,q_inv,q_inv_normalized,coupling,saturation,flag");
    int weak_rows = 0, strong_rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        const double qn = std::stod(cells[3]);
        if (cells[4] == "weak") {
            ++weak_rows;
            // normalized weak low-photon plateau ~ 1 by construction
            CHECK(std::abs(qn - 1.0) < 0.10);
        } else {
            ++strong_rows;
            // strong plateau ~ 2.0 / 0.015748 = 127
            CHECK(std::abs(qn - 127.0) / 127.0 < 0.10);
        }
    }
    CHECK(weak_rows == 2);
    CHECK(strong_rows == 2);
}

TEST_CASE("run: json format embeds data and metadata in one document") {
    RunConfig cfg = validate_config(
        "mode = evolve\nengine = manifold\ng = 10\nT1 = 1\nT2 = 0.2\nn0 = 0.005\n"
        "t_end = 1\nsamples = 51\nformat = json\n");
    std::ostringstream out, err;
    REQUIRE(run(cfg, out, err) == 0);
    const auto doc = nlohmann::ordered_json::parse(out.str());
    CHECK(doc.contains("meta"));
    CHECK(doc.at("meta").contains("invariant_checks"));
    CHECK(doc.at("data").size() == 51);
    CHECK(doc.at("data")[0].at("engine") == "manifold");
    // the embedded config re-parses
    const RunConfig back = config_from_json(doc.at("meta").dump());
    CHECK(back.model.n0 == cfg.model.n0);
}

TEST_CASE("exit codes per error class") {
    CHECK(exit_code_for(ConfigError("x")) == 2);
    CHECK(exit_code_for(TruncationError("x")) == 3);
    CHECK(exit_code_for(IntegratorError("x")) == 4);
    CHECK(exit_code_for(EstimatorError("x")) == 5);
    CHECK(exit_code_for(WindowTooShort("x")) == 5);

    // a truncation error surfaces as status 3 through run()
    RunConfig cfg = validate_config(
        "mode = evolve\nengine = master\ng = 0.2\nT1 = 1\nT2 = 0.2\nn0 = 1\n"
        "fock_cutoff = 8\nt_end = 1\nsamples = 11\n");
    std::ostringstream out, err;
    CHECK(run(cfg, out, err) == 3);
    CHECK(err.str().find("tail") != std::string::npos);
}
