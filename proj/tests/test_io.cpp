#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "nsv/error.hpp"
#include "nsv/io.hpp"
#include "nsv/random_fields.hpp"
#include "nsv/runfile.hpp"
#include "nsv/spectral.hpp"

using namespace nsv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / "nsv_test_io";
    fs::create_directories(d);
    return d / name;
}

bool same_bits(const SpectralField& a, const SpectralField& b) {
    return a.grid().same_as(b.grid()) &&
           std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(cplx)) == 0;
}

std::string error_of(const std::string& text) {
    try {
        parse_runfile(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("diagnostics CSV") {
    ModelConfig cfg;
    cfg.grid = Grid::make(2, 16);
    cfg.t_end = 0.05;
    cfg.history.M = 64;
    Trajectory tr = solve(cfg, random_velocity(cfg.grid, 1, 4, cfg.alpha, 1.0), make_history(cfg));
    const auto p = scratch("diag.csv").string();
    write_diagnostics_csv(p, tr);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "t,E,E1,Pi,Pi1,Phi,Phi1,Psi,Psi1,Lambda_eps,Lambda1,norm_u_minus_theta,norm_u_0,norm_u_1,norm_u_2,residual");
    DiagnosticsTable t = read_diagnostics_csv(p);
    REQUIRE(t.rows.size() == tr.reports.size());
    auto E = t.column("E");
    for (std::size_t i = 0; i < E.size(); ++i) CHECK(E[i] == tr.reports[i].E);
    CHECK(t.column("residual").back() == tr.residual.back());
    CHECK_THROWS_AS(t.column("nope"), DomainError);
    // deterministic output
    const auto p2 = scratch("diag2.csv").string();
    write_diagnostics_csv(p2, solve(cfg, random_velocity(cfg.grid, 1, 4, cfg.alpha, 1.0), make_history(cfg)));
    std::ifstream a(p), b(p2);
    std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
}

TEST_CASE("field snapshots round trip") {
    for (auto g : {Grid::make(2, 16), Grid::make(3, 8)}) {
        SpectralField u = random_velocity(g, 4, 2, 0.1, 1.0);
        const auto pb = scratch("u.bin").string(), pc = scratch("u.csv").string();
        write_field_binary(pb, u);
        CHECK(same_bits(read_field_binary(pb), u));
        CHECK(same_bits(read_field_binary(pb, g), u));
        CHECK_THROWS_AS(read_field_binary(pb, Grid::make(2, 32)), DimensionError);
        write_field_csv(pc, u);
        CHECK(same_bits(read_field_csv(pc), u));
    }
    std::ofstream(scratch("junk.bin")) << "hello";
    CHECK_THROWS_AS(read_field_binary(scratch("junk.bin").string()), DomainError);
}

TEST_CASE("history checkpoint round trips bit-exactly") {
    ModelConfig cfg;
    cfg.grid = Grid::make(2, 16);
    cfg.kernel = Kernel::exponential_sum({{0.5, 1.0}, {0.5, 3.0}});
    cfg.history.M = 64;
    cfg.t_end = 0.1;
    for (HistoryMode mode : {HistoryMode::prony, HistoryMode::grid}) {
        cfg.history.mode = mode;
        Stepper st(cfg, make_state(cfg, random_velocity(cfg.grid, 8, 4, cfg.alpha, 1.0)));
        for (int i = 0; i < 37; ++i) st.step();
        const HistoryField& eta = st.state().eta;
        const auto p = scratch("eta.bin").string();
        write_history(p, eta, st.state().t);
        double t = 0.0;
        HistoryField back = read_history(p, cfg.kernel, cfg.grid, &t);
        CHECK(t == st.state().t);
        CHECK(back.mode() == mode);
        CHECK(std::memcmp(back.values().data(), eta.values().data(), eta.values().size() * sizeof(cplx)) == 0);
        CHECK(back.front_position() == eta.front_position());
        CHECK(same_bits(back.front_value(), eta.front_value()));
        REQUIRE(back.moments().size() == eta.moments().size());
        for (std::size_t j = 0; j < eta.moments().size(); ++j) {
            CHECK(same_bits(back.moments()[j], eta.moments()[j]));
            CHECK(back.quad0()[j] == eta.quad0()[j]);
        }
        CHECK_THROWS_AS(read_history(p, Kernel::exponential_sum({{1.0, 2.0}}), cfg.grid), ValidationError);
    }
}

TEST_CASE("runfile: defaults and sections") {
    RunFile d = default_runfile();
    CHECK(d.model.grid->dim() == 2);
    CHECK(d.model.grid->n() == 64);
    CHECK(d.model.dt == 1e-3);
    CHECK(d.model.history.M == 256);
    CHECK(d.model.history.mode == HistoryMode::prony);
    CHECK(!d.model.forcing.empty());
    CHECK(max_divergence(d.model.forcing) < 1e-14);

    RunFile r = parse_runfile(R"({
      "domain": {"dim": 3, "n": 16},
      "kernel": {"variant": "tabulated", "table": {"s": [0, 1, 2], "mu": [2, 1, 0.5]}, "epsilon": 0.5},
      "damping": {"beta": 0.25, "theta": 0.5},
      "forcing": "zero",
      "time": {"dt": 0.002, "t_end": 1, "stride": 5},
      "experiment": {"name": "decay", "seed": 9, "parameters": {"energy": 2}},
      "output": {"directory": "x", "formats": ["csv"]}
    })");
    CHECK(r.model.grid->dim() == 3);
    CHECK(r.model.history.mode == HistoryMode::grid);
    CHECK(r.model.kernel.epsilon() == 0.5);
    CHECK(r.model.forcing.empty());
    CHECK(r.model.theta == 0.5);
    CHECK(r.seed == 9);
    CHECK(r.scenario == "decay");
    CHECK(r.wants("csv"));
    CHECK(!r.wants("json"));
    CHECK(r.hash != d.hash);
    CHECK(parse_runfile(R"({"damping": {"beta": 0.25}})").hash == parse_runfile(R"({ "damping" : {"beta":0.25} })").hash);
}

TEST_CASE("runfile: diagnostics") {
    CHECK(error_of(R"({"damping": {"beta": 0.5, "gamma": 1}})").find("damping.gamma") != std::string::npos);
    CHECK(error_of(R"({"dampng": {}})").find("unknown key 'dampng'") != std::string::npos);
    CHECK(error_of(R"({"forcing": {"modes": [{"k": [1, 0], "amp": [0, 1]}]}})").find("forcing.modes[0].amp") !=
          std::string::npos);
    const std::string bad = "{\n  \"time\": {\"dt\": 1e-3,\n  \"t_end\" 5}\n}";
    CHECK(error_of(bad).find("line 3") != std::string::npos);
    CHECK(error_of(R"({"time": {"dt": "fast"}})").find("time.dt: expected a number") != std::string::npos);
    CHECK(error_of(R"({"damping": {"beta": -1}})").find("beta") != std::string::npos);
    CHECK(error_of(R"({"domain": {"n": 48}})") != "");
    CHECK(error_of(R"({"kernel": {"variant": "tabulated", "table": {"s": [0, 1], "mu": [1, 2]}}})") != "");
    CHECK(error_of(R"({"history": {"mode": "prony"}, "kernel": {"variant": "tabulated", "table": {"s": [0, 1], "mu": [1, 0.5]}}})") != "");
    CHECK(error_of(R"({"kernel": {"epsilon": 1.5}})") != "");
    CHECK_THROWS_AS(load_runfile("/nonexistent/run.json"), ValidationError);
    Parameters p(nlohmann::json{{"energy", 2.0}}, {"energy", "band"}, "decay");
    CHECK(p.number("energy", 1.0) == 2.0);
    CHECK(p.number("band", 4.0) == 4.0);
    CHECK_THROWS_AS(Parameters(nlohmann::json{{"enrgy", 2.0}}, {"energy"}, "decay"), ValidationError);
}
