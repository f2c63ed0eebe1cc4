#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "errb/report.hpp"

using namespace errb;

namespace {

const double kSqrt2 = std::sqrt(2.0);

std::string instance_path(const char* name) {
    return std::string(ERRB_INSTANCE_DIR) + "/" + name;
}

std::string data_path(const char* name) {
    return std::string(ERRB_TEST_DATA_DIR) + "/" + name;
}

} // namespace

TEST_CASE("conjugate oracle on hand-checked values") {
    auto q = ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0}), {0.0}, 1.0);
    auto v1 = oracle_conjugate(q, {1.0}, 10.0, 1e-3);
    REQUIRE(v1.value == Catch::Approx(1.5).margin(2e-3));
    REQUIRE_FALSE(v1.max_on_boundary);

    auto v0 = oracle_conjugate(q, {0.0}, 10.0, 1e-3);
    REQUIRE(v0.value == Catch::Approx(1.0).margin(1e-6));

    auto ma = ConvexFunctionSpec::max_affine({{{1.0}, 1.0}, {{-1.0}, 1.0}});
    auto esc = oracle_conjugate(ma, {2.0}, 10.0, 1e-2);
    REQUIRE(esc.max_on_boundary); // y outside dom f*: sup escapes with the box

    auto high = ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0, 1.0, 1.0, 1.0}),
                                              {0.0, 0.0, 0.0, 0.0}, 1.0);
    REQUIRE_THROWS_AS(oracle_conjugate(high, Vec{0.0, 0.0, 0.0, 0.0}, 1.0, 0.5),
                      TooHighDimension);
}

TEST_CASE("distance oracle sandwiches the library distance") {
    auto box = SetSpec::polyhedron_h({{{1.0}, 1.0}, {{-1.0}, 1.0}});
    double d = oracle_distance(box, {3.0}, 2.0, 1e-3);
    REQUIRE(d == Catch::Approx(2.0).margin(2e-3));
    REQUIRE(oracle_distance(box, {0.5}, 2.0, 1e-3) == Catch::Approx(0.0).margin(1e-9));

    auto e2 = SetSpec::level_set(
        ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0, 4.0}), {0.0, 0.0}, 1.0));
    double d2 = oracle_distance(e2, {3.0, 0.0}, 2.0, 0.01);
    REQUIRE(d2 == Catch::Approx(3.0 - kSqrt2).margin(0.02));
    double lib = project(e2, {3.0, 0.0}).d;
    REQUIRE(lib <= d2 + 1e-9);
    REQUIRE(lib >= d2 - 0.01 * std::sqrt(2.0) - 1e-9);

    auto empty_grid = SetSpec::polyhedron_h({{{1.0}, -5.0}, {{-1.0}, 4.0}});
    REQUIRE_THROWS_AS(oracle_distance(empty_grid, Vec{0.0}, 1.0, 0.5), EmptyGrid);
}

TEST_CASE("instance files load and round-trip") {
    auto i1 = load_instance(instance_path("I1.json"));
    REQUIRE(i1.problem.name == "I1");
    REQUIRE(i1.problem.scalar);
    REQUIRE(i1.problem.f->is_max_affine());
    REQUIRE(i1.sampling.seed == 20260417ULL);

    Json j = instance_to_json(i1);
    auto again = parse_instance_json(j);
    REQUIRE(instance_to_json(again).dump() == j.dump());

    auto i5 = load_instance(instance_path("I5.json"));
    REQUIRE_FALSE(i5.problem.scalar);
    REQUIRE(i5.problem.K->kind() == ConeKind::SecondOrder);
}

TEST_CASE("malformed instances raise ParseError") {
    REQUIRE_THROWS_AS(load_instance(data_path("bad_dimension.json")), ParseError);
    REQUIRE_THROWS_AS(load_instance(data_path("not_json.json")), ParseError);
    REQUIRE_THROWS_AS(load_instance("/nonexistent/nowhere.json"), ParseError);
}

TEST_CASE("empirical alpha on canonical instances") {
    auto i1 = load_instance(instance_path("I1.json"));
    auto r1 = empirical_alpha(i1.problem, 10.0, 20000, 42);
    REQUIRE(r1.empirical_alpha == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(r1.positive_residuals > 0);

    auto i3 = load_instance(instance_path("I3.json"));
    auto r3 = empirical_alpha(i3.problem, 10.0, 20000, 43);
    REQUIRE(r3.empirical_alpha == Catch::Approx(1.0).margin(1e-6));

    auto i5 = load_instance(instance_path("I5.json"));
    auto r5 = empirical_alpha(i5.problem, 10.0, 20000, 44);
    REQUIRE(r5.empirical_alpha == Catch::Approx(kSqrt2).margin(1e-4));
}

TEST_CASE("worst witness reproduces the empirical alpha") {
    auto i3 = load_instance(instance_path("I3.json"));
    auto rep = empirical_alpha(i3.problem, 10.0, 5000, 90);
    SetSpec Q = solution_set(i3.problem);
    double r = residual(i3.problem, rep.worst_witness);
    REQUIRE(r > 0.0);
    double ratio = project(Q, rep.worst_witness).d / r;
    REQUIRE(ratio == Catch::Approx(rep.empirical_alpha).margin(1e-9));
}

TEST_CASE("histogram counts every positive-residual sample") {
    auto i1 = load_instance(instance_path("I1.json"));
    auto rep = empirical_alpha(i1.problem, 10.0, 5000, 7);
    std::uint64_t total = 0;
    for (auto b : rep.ratio_histogram) total += b;
    REQUIRE(total == static_cast<std::uint64_t>(rep.positive_residuals));
}

TEST_CASE("soundness flag against the certificate") {
    auto i1 = load_instance(instance_path("I1.json"));
    auto rep = empirical_alpha(i1.problem, 10.0, 5000, 7, 2.0);
    REQUIRE(rep.sound.has_value());
    REQUIRE(*rep.sound);
    auto bad = empirical_alpha(i1.problem, 10.0, 5000, 7, 0.5);
    REQUIRE_FALSE(*bad.sound);
}

TEST_CASE("no positive residual is reported, not fatal") {
    auto i1 = load_instance(instance_path("I1.json"));
    auto rep = empirical_alpha(i1.problem, 0.5, 500, 3); // box inside S
    REQUIRE(rep.no_positive_residual);
    REQUIRE(rep.empirical_alpha == 0.0);
}

TEST_CASE("plateau study") {
    auto i4 = load_instance(instance_path("I4.json"));
    auto rep = plateau_study(i4.problem, {10.0, 100.0, 1000.0}, 4000, 11);
    REQUIRE(rep.plateau_trace.size() == 3);
    for (std::size_t j = 1; j < rep.plateau_trace.size(); ++j)
        REQUIRE(rep.plateau_trace[j].alpha >= rep.plateau_trace[j - 1].alpha);
    // closed form: ratio = 2/(|x1| + sqrt 2) <= 1/sqrt 2
    REQUIRE(rep.empirical_alpha <= 1.0 / kSqrt2 + 1e-9);
    REQUIRE(rep.empirical_alpha > 0.6);

    auto i2 = load_instance(instance_path("I2.json"));
    auto flat = plateau_study(i2.problem, {10.0, 100.0}, 4000, 12);
    REQUIRE(flat.plateau_trace[1].alpha ==
            Catch::Approx(flat.plateau_trace[0].alpha).epsilon(0.05));

    auto tiny = plateau_study(i2.problem, {0.1, 10.0}, 1000, 13);
    REQUIRE(tiny.plateau_trace[0].no_positive_residual);

    auto i1 = load_instance(instance_path("I1.json"));
    REQUIRE_THROWS_AS(plateau_study(i1.problem, {10.0}, 100, 1), Unsupported);
}

TEST_CASE("empirical alpha is deterministic across thread counts") {
    auto i3 = load_instance(instance_path("I3.json"));
    auto a = empirical_alpha(i3.problem, 10.0, 8000, 77, 2.0, 1);
    auto b = empirical_alpha(i3.problem, 10.0, 8000, 77, 2.0, 4);
    REQUIRE(a.empirical_alpha == b.empirical_alpha);
    REQUIRE(a.worst_witness == b.worst_witness);
    REQUIRE(a.ratio_histogram == b.ratio_histogram);
    REQUIRE(detail::validation_to_json(a).dump() == detail::validation_to_json(b).dump());
}

TEST_CASE("scenario reports are byte-identical across parallelism") {
    auto spec = load_instance(instance_path("I3.json"));
    spec.scenario = Json::object();
    spec.scenario["samples"] = 4000;
    spec.scenario["duality_samples"] = 300;

    ScenarioOptions o1;
    o1.threads = 1;
    ScenarioOptions o2;
    o2.threads = 4;
    std::ostringstream s1, s2;
    int c1 = run_scenario(spec, o1, s1);
    int c2 = run_scenario(spec, o2, s2);
    REQUIRE(c1 == 0);
    REQUIRE(c2 == 0);
    REQUIRE(s1.str() == s2.str());
    REQUIRE(s1.str().find("\"exit_code\": 0") != std::string::npos);
}

TEST_CASE("scenario exit codes") {
    ScenarioOptions opt;
    std::ostringstream sink;

    REQUIRE(run_scenario_file(data_path("not_json.json"), opt, sink) == 2);
    REQUIRE(run_scenario_file(data_path("bad_dimension.json"), opt, sink) == 2);
    REQUIRE(run_scenario_file(data_path("no_slater.json"), opt, sink) == 3);
    REQUIRE(run_scenario_file(data_path("inject_alpha.json"), opt, sink) == 4);
    // 13 max-affine rows certify fine but trip the documented conjugate row
    // limit inside the duality sweep: internal numerical failure
    REQUIRE(run_scenario_file(data_path("thirteen_rows.json"), opt, sink) == 5);

    auto spec = load_instance(instance_path("I1.json"));
    spec.scenario = Json::object();
    spec.scenario["samples"] = 2000;
    spec.scenario["duality_samples"] = 200;
    std::ostringstream out;
    REQUIRE(run_scenario(spec, opt, out) == 0);
    REQUIRE(out.str().find("\"sound\": true") != std::string::npos);
}

TEST_CASE("scenario handles the unbounded-quadratic regime") {
    auto spec = load_instance(instance_path("I4.json"));
    spec.scenario["samples"] = 2000;
    ScenarioOptions opt;
    std::ostringstream out;
    REQUIRE(run_scenario(spec, opt, out) == 0);
    REQUIRE(out.str().find("quadratic_regime") != std::string::npos);
    REQUIRE(out.str().find("plateau_trace") != std::string::npos);
}

TEST_CASE("strict tolerance profile runs clean") {
    auto spec = load_instance(instance_path("I1.json"));
    spec.scenario = Json::object();
    spec.scenario["samples"] = 1000;
    spec.scenario["duality_samples"] = 100;
    ScenarioOptions opt;
    opt.tol_profile = "strict";
    std::ostringstream out;
    REQUIRE(run_scenario(spec, opt, out) == 0);
    REQUIRE(out.str().find("\"tol_profile\": \"strict\"") != std::string::npos);
}

TEST_CASE("text format renders a summary") {
    auto spec = load_instance(instance_path("I1.json"));
    spec.scenario = Json::object();
    spec.scenario["samples"] = 500;
    spec.scenario["duality_samples"] = 50;
    ScenarioOptions opt;
    opt.format = "text";
    std::ostringstream out;
    REQUIRE(run_scenario(spec, opt, out) == 0);
    REQUIRE(out.str().find("certificate: alpha") != std::string::npos);
    REQUIRE(out.str().find("exit 0") != std::string::npos);
}
