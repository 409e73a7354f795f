#include "doctest.h"

#include "ddmpc/config.hpp"
#include "ddmpc/csv.hpp"
#include "ddmpc/experiment.hpp"
#include "ddmpc/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ddmpc;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("ddmpc_harness_" + name)).string();
}

// Four-tank run with only a few controlled steps.
ExperimentConfig short_four_tank(Index controlled_steps) {
    ExperimentConfig cfg = builtin_config("fourtank_nominal");
    cfg.steps = cfg.excitation.steps + controlled_steps;
    return cfg;
}

std::string expect_config_error(const std::string& yaml) {
    try {
        parse_config(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    FAIL("config was accepted: " << yaml);
    return {};
}

}  // namespace

TEST_CASE("builtin configurations survive a YAML round trip") {
    for (const std::string& name : builtin_config_names()) {
        CAPTURE(name);
        const ExperimentConfig cfg = builtin_config(name);
        CHECK_NOTHROW(cfg.validate());
        CHECK(parse_config(dump_config(cfg)) == cfg);

        const std::string path = temp_path(name + ".yaml");
        save_config(cfg, path);
        CHECK(load_config(path) == cfg);
        CHECK(resolve_config(path) == cfg);
        std::filesystem::remove(path);
    }
    CHECK_THROWS_AS(builtin_config("nope"), ConfigError);
}

TEST_CASE("round trip keeps awkward doubles exactly") {
    ExperimentConfig cfg = builtin_config("fourtank_nominal");
    cfg.nonlinear.lambda_alpha = 0.1 + 0.2;
    cfg.plant.four_tank.A1 = 50.270000000000003;
    cfg.cost_weight(0, 0) = 1.0 / 3.0;
    const ExperimentConfig back = parse_config(dump_config(cfg));
    CHECK(back.nonlinear.lambda_alpha == cfg.nonlinear.lambda_alpha);
    CHECK(back == cfg);

    ExperimentConfig lti = builtin_config("lti_nominal_demo");
    lti.lti.output_box.upper(0) = std::numeric_limits<double>::infinity();
    lti.lti.output_box.lower(0) = -std::numeric_limits<double>::infinity();
    const ExperimentConfig lti_back = parse_config(dump_config(lti));
    CHECK(std::isinf(lti_back.lti.output_box.upper(0)));
    CHECK(lti_back == lti);
}

TEST_CASE("config errors name the offending line") {
    const std::string base = dump_config(builtin_config("lti_nominal_demo"));
    const std::string msg = expect_config_error(base + "bogus: 1\n");
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("line") != std::string::npos);

    const std::string typed = expect_config_error("steps: many\n");
    CHECK(typed.find("line 1") != std::string::npos);

    CHECK_THROWS_AS(load_config(temp_path("does_not_exist.yaml")), IoError);
}

TEST_CASE("validation rejects inconsistent experiments") {
    {
        ExperimentConfig cfg = builtin_config("fourtank_nominal");
        cfg.excitation.steps = cfg.nonlinear.N - 1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    {
        ExperimentConfig cfg = builtin_config("fourtank_nominal");
        cfg.schedule.clear();
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    {
        ExperimentConfig cfg = builtin_config("fourtank_nominal");
        cfg.plant.substeps = 4;  // only meaningful with a perturbed plant
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    {
        ExperimentConfig cfg = builtin_config("lti_nominal_demo");
        cfg.schedule = {{0, Vector::Zero(1)}};
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    {
        ExperimentConfig cfg = builtin_config("lti_nominal_demo");
        cfg.excitation.steps = cfg.lti.L + 2 * cfg.lti.n - 1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    {
        ExperimentConfig cfg = builtin_config("lti_nominal_demo");
        cfg.cost_weight = Matrix::Identity(2, 2);
        CHECK_THROWS(cfg.validate());
    }
}

TEST_CASE("target_at follows the schedule") {
    const std::vector<SetpointChange> schedule{{0, Vector::Constant(2, 15.0)}, {600, Vector::Constant(2, 11.0)}};
    CHECK(target_at(schedule, 0)(0) == 15.0);
    CHECK(target_at(schedule, 599)(1) == 15.0);
    CHECK(target_at(schedule, 600)(0) == 11.0);
    CHECK(target_at(schedule, 5000)(1) == 11.0);
}

TEST_CASE("closed-loop cost on synthetic logs") {
    SimulationLog log;
    const Vector target = Vector::Constant(2, 15.0);
    const Vector offset = (Vector(2) << 0.5, -2.0).finished();
    for (Index t = 0; t < 20; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.y = t < 10 ? target : Vector(target + offset);
        rec.y_target = target;
        log.records.push_back(rec);
    }
    const std::vector<SetpointChange> schedule{{0, target}};
    const double s_bar = 20.0;
    const Matrix S = s_bar * Matrix::Identity(2, 2);

    CHECK(closed_loop_cost(log, schedule, S, 0, 9) == 0.0);
    CHECK(closed_loop_cost(log, schedule, S, 10, 19) == doctest::Approx(10 * s_bar * offset.squaredNorm()));
    CHECK(closed_loop_cost(log, schedule, S, 15, 19) == doctest::Approx(5 * s_bar * offset.squaredNorm()));
    CHECK(closed_loop_cost(log, schedule, S, 20, 19) == 0.0);
    CHECK_THROWS_AS(closed_loop_cost(log, schedule, S, 10, 20), std::out_of_range);
    CHECK_THROWS_AS(closed_loop_cost(log, schedule, S, -1, 5), std::out_of_range);

    // Non-diagonal weight.
    const Matrix W = (Matrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
    CHECK(closed_loop_cost(log, schedule, W, 10, 10) == doctest::Approx(offset.dot(W * offset)));
}

TEST_CASE("LTI demos converge and the running cost matches a recomputation") {
    for (const std::string name : {"lti_nominal_demo", "lti_robust_demo"}) {
        CAPTURE(name);
        const ExperimentConfig cfg = builtin_config(name);
        const SimulationLog log = run_experiment(cfg);
        REQUIRE(log.records.size() == static_cast<std::size_t>(cfg.steps));
        CHECK_FALSE(log.summary.aborted);
        CHECK(log.summary.infeasible_events == 0);
        CHECK(log.summary.converged);
        const double J = closed_loop_cost(log, effective_schedule(cfg), cfg.cost_weight, cfg.first_cost_step(),
                                          cfg.steps - 1);
        CHECK(J == doctest::Approx(log.summary.cost).epsilon(1e-12));
        for (std::size_t t = 0; t < log.records.size(); ++t) {
            CHECK(log.records[t].t == static_cast<Index>(t));
            CHECK(log.records[t].controlled == (static_cast<Index>(t) >= cfg.excitation.steps));
            CHECK(cfg.lti.input_box.contains(log.records[t].u, 1e-6));
        }
    }
}

TEST_CASE("runs are deterministic under a fixed seed") {
    const ExperimentConfig cfg = builtin_config("lti_robust_demo");
    const SimulationLog a = run_experiment(cfg);
    const SimulationLog b = run_experiment(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t t = 0; t < a.records.size(); ++t) {
        REQUIRE(same_values(a.records[t].u, b.records[t].u));
        REQUIRE(same_values(a.records[t].y, b.records[t].y));
    }
    CHECK(a.summary.cost == b.summary.cost);

    const SimulationLog c = run_experiment(with_seed(cfg, 99));
    CHECK_FALSE(same_values(a.records[0].u, c.records[0].u));
}

TEST_CASE("a run that ends with the excitation has zero cost") {
    ExperimentConfig cfg = builtin_config("fourtank_nominal");
    cfg.steps = cfg.excitation.steps;
    const SimulationLog log = run_experiment(cfg);
    CHECK(log.records.size() == static_cast<std::size_t>(cfg.steps));
    CHECK(log.summary.cost == 0.0);
    CHECK(std::isnan(log.summary.final_error));
    CHECK_FALSE(log.summary.converged);
    CHECK(closed_loop_cost(log, cfg.schedule, cfg.cost_weight, cfg.first_cost_step(), cfg.steps - 1) == 0.0);
}

TEST_CASE("short four-tank run with a setpoint change") {
    ExperimentConfig cfg = short_four_tank(30);
    const Index change = cfg.excitation.steps + 15;
    cfg.schedule.push_back({change, Vector::Constant(2, 11.0)});
    const SimulationLog log = run_experiment(cfg);
    REQUIRE(log.records.size() == static_cast<std::size_t>(cfg.steps));
    CHECK_FALSE(log.summary.aborted);
    CHECK(log.artificial_setpoint);
    CHECK(log.records[static_cast<std::size_t>(change - 1)].y_target(0) == 15.0);
    CHECK(log.records[static_cast<std::size_t>(change)].y_target(0) == 11.0);
    for (const StepRecord& rec : log.records) {
        CHECK(cfg.nonlinear.input_box.contains(rec.u, 1e-6));
        if (rec.controlled) {
            CHECK(rec.u_setpoint.size() == 2);
            CHECK(std::isfinite(rec.objective));
        }
    }
    const double J = closed_loop_cost(log, cfg.schedule, cfg.cost_weight, cfg.first_cost_step(), cfg.steps - 1);
    CHECK(J == doctest::Approx(log.summary.cost).epsilon(1e-12));
}

TEST_CASE("log CSV has one row per step and a stable header") {
    const ExperimentConfig cfg = builtin_config("lti_nominal_demo");
    const SimulationLog log = run_experiment(cfg);
    std::ostringstream out;
    write_log_csv(log, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,u1,y1,x1,x2,objective,alpha_norm,sigma_norm,pe_min_sv,qp_iters");
    Index rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == cfg.steps);

    // The nonlinear log carries the artificial setpoint columns.
    const SimulationLog nl = run_experiment(short_four_tank(2));
    const std::vector<std::string> header = log_header(nl);
    CHECK(std::find(header.begin(), header.end(), "us1") != header.end());
    CHECK(std::find(header.begin(), header.end(), "ys2") != header.end());

    // Reading the log back as input/output data gives the recorded signals.
    std::istringstream again(out.str());
    const IoData data = read_io_csv(again);
    REQUIRE(data.u.length() == cfg.steps);
    CHECK(data.u.at(7)(0) == doctest::Approx(log.records[7].u(0)));
    CHECK(data.y.at(90)(0) == doctest::Approx(log.records[90].y(0)));
}

TEST_CASE("input/output CSV round trip and diagnostics") {
    Matrix u(2, 5), y(1, 5);
    u << 1.0, 2.5, -3.0, 1e-17, 0.1, 4.0, 5.0, 6.0, 7.0, 8.0;
    y << 0.3, 0.2, 0.1, 0.0, -0.1;
    const std::string path = temp_path("io.csv");
    write_io_csv(Sequence(u), Sequence(y), path);
    const IoData back = read_io_csv(path);
    CHECK(back.u == Sequence(u));
    CHECK(back.y == Sequence(y));
    std::filesystem::remove(path);

    std::istringstream no_inputs("t,y1\n0,1\n");
    CHECK_THROWS_AS(read_io_csv(no_inputs), IoError);
    std::istringstream bad("u1,y1\n1,2\n3,x\n");
    try {
        read_io_csv(bad, "bad.csv");
        FAIL("malformed CSV accepted");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(read_io_csv(temp_path("missing.csv")), IoError);
}

TEST_CASE("sweep helpers") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS(median({}));

    const ExperimentConfig nl = builtin_config("fourtank_nominal");
    CHECK(with_parameter(nl, "lambda_alpha", 0.5).nonlinear.lambda_alpha == 0.5);
    const ExperimentConfig longer = with_parameter(nl, "N", 200);
    CHECK(longer.nonlinear.N == 200);
    CHECK(longer.excitation.steps == 200);
    CHECK(with_parameter(nl, "s_bar", 7.0).nonlinear.S.isApprox(7.0 * Matrix::Identity(2, 2)));
    CHECK_THROWS_AS(with_parameter(nl, "L", 2.5), ConfigError);
    CHECK_THROWS_AS(with_parameter(nl, "gamma", 1.0), ConfigError);
    CHECK_THROWS_AS(with_parameter(builtin_config("lti_robust_demo"), "N", 50), ConfigError);

    const ExperimentConfig seeded = with_seed(nl, 42);
    CHECK(seeded.excitation.seed == 42);
    CHECK(seeded.plant.noise_seed == 42);
}

TEST_CASE("sweep over an LTI demo keeps order and captures failures") {
    const ExperimentConfig base = builtin_config("lti_robust_demo");
    SweepOptions options;
    options.seeds = {1, 2};
    options.threads = 2;
    // L = 200 needs more data than the excitation provides and must fail cleanly.
    const std::vector<SweepPoint> points = sweep(base, "L", {8, 200}, options);
    REQUIRE(points.size() == 2);
    CHECK(points[0].value == 8);
    REQUIRE(points[0].runs.size() == 2);
    CHECK(points[0].runs[0].seed == 1);
    CHECK(points[0].runs[1].seed == 2);
    for (const RunOutcome& r : points[0].runs) {
        CHECK(r.error.empty());
        CHECK(std::isfinite(r.cost));
    }
    for (const RunOutcome& r : points[1].runs) {
        CHECK_FALSE(r.error.empty());
        CHECK(std::isinf(r.cost));
    }
    CHECK_FALSE(points[1].good);

    // Batch results match individual runs.
    const std::vector<RunOutcome> batch = run_batch({with_seed(base, 1), with_seed(base, 2)}, 2);
    CHECK(batch[1].cost == run_experiment(with_seed(base, 2)).summary.cost);

    std::ostringstream csv;
    write_sweep_csv("L", points, csv);
    CHECK(csv.str().rfind("parameter,value,seed,J,final_error,converged,error", 0) == 0);
}
