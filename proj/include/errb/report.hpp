#pragma once

// Report serialization and the scenario pipeline.
//
// Machine-format reports are JSON with a fixed key order and no volatile
// fields (no timestamps, no thread counts), so identical (instance, seed)
// runs are byte-identical regardless of parallelism.
//
// Exit-code contract:
//   0  all configured checks pass
//   2  parse failure
//   3  hypothesis refusal (certificate expected but refused)
//   4  soundness violation (empirical > certified, or a duality sweep
//      violated at the certified constant) -- the suite's tripwire
//   5  internal numerical failure

#include <iostream>
#include <string>

#include "errb/harness.hpp"

namespace errb {

// ---------------------------------------------------------------------------
// JSON rendering

namespace detail {

inline Json tolerances_to_json(const Tolerances& t) {
    Json j;
    j["rank_rel"] = t.rank_rel;
    j["psd_rel"] = t.psd_rel;
    j["membership"] = t.membership;
    j["golden"] = t.golden;
    j["root"] = t.root;
    j["dykstra"] = t.dykstra;
    j["fw_gap"] = t.fw_gap;
    j["subgrad_proj"] = t.subgrad_proj;
    j["vertex_dedup"] = t.vertex_dedup;
    j["violation_rel"] = t.violation_rel;
    j["slater_strict"] = t.slater_strict;
    j["residual_floor"] = t.residual_floor;
    return j;
}

inline Json hypotheses_to_json(const HypothesisReport& h) {
    Json j;
    j["proper"] = h.proper;
    if (h.slater.found) {
        Json s;
        s["found"] = true;
        s["x0"] = vec_to_json(h.slater.x0);
        s["margin"] = h.slater.margin;
        j["slater"] = s;
    } else {
        j["slater"] = Json{{"found", false}};
    }
    j["bounded"] = h.bounded == BoundedVerdict::yes   ? "true"
                   : h.bounded == BoundedVerdict::no ? "false"
                                                     : "inconclusive";
    j["nonempty"] = h.nonempty;
    return j;
}

inline Json certificate_to_json(const BoundCertificate& c) {
    Json j;
    j["alpha"] = c.alpha;
    j["kind"] = c.kind == BoundKind::scalar ? "scalar" : "vector";
    j["slater_point"] = vec_to_json(c.slater_point);
    j["margin"] = c.margin;
    Json d;
    d["value"] = c.diam.status == DiamStatus::infinite ? Json("inf") : Json(c.diam.value);
    d["status"] = c.diam.status == DiamStatus::exact            ? "exact"
                  : c.diam.status == DiamStatus::lower_estimate ? "lower_estimate"
                                                                : "infinite";
    if (c.diam.status != DiamStatus::infinite) {
        d["witness_a"] = vec_to_json(c.diam.witness_a);
        d["witness_b"] = vec_to_json(c.diam.witness_b);
    }
    j["diam"] = d;
    j["status"] = c.status == CertStatus::certified ? "certified" : "empirical";
    j["norm"] = c.norm;
    j["notes"] = c.notes;
    return j;
}

inline Json validation_to_json(const ValidationReport& v) {
    Json j;
    j["empirical_alpha"] = v.empirical_alpha;
    j["worst_witness"] = vec_to_json(v.worst_witness);
    j["radius"] = v.radius;
    j["sample_count"] = v.sample_count;
    j["seed"] = v.seed;
    j["positive_residuals"] = v.positive_residuals;
    j["no_positive_residual"] = v.no_positive_residual;
    Json h = Json::array();
    for (auto b : v.ratio_histogram) h.push_back(b);
    j["ratio_histogram"] = h;
    if (v.certificate_alpha) j["certificate_alpha"] = *v.certificate_alpha;
    if (v.sound) j["sound"] = *v.sound;
    if (!v.plateau_trace.empty()) {
        Json t = Json::array();
        for (const auto& e : v.plateau_trace) {
            Json je;
            je["radius"] = e.radius;
            je["alpha"] = e.alpha;
            je["no_positive_residual"] = e.no_positive_residual;
            t.push_back(je);
        }
        j["plateau_trace"] = t;
    }
    return j;
}

inline Json sweep_to_json(const DualitySweepReport& s) {
    Json j;
    j["radius"] = s.radius;
    j["sample_count"] = s.sample_count;
    j["seed"] = s.seed;
    j["max_violation"] = std::isfinite(s.max_violation) ? Json(s.max_violation) : Json("inf");
    j["max_gap"] = std::isfinite(s.max_gap) ? Json(s.max_gap) : Json("inf");
    if (s.argmin_lambda_lo <= s.argmin_lambda_hi) {
        j["argmin_lambda_range"] = Json::array({s.argmin_lambda_lo, s.argmin_lambda_hi});
    }
    j["verdict"] = s.verdict == SweepVerdict::holds ? "holds" : "violated";
    if (s.verdict == SweepVerdict::violated) {
        j["witness"] = vec_to_json(s.witness);
        j["witness_excess"] =
            std::isfinite(s.witness_excess) ? Json(s.witness_excess) : Json("inf");
    }
    return j;
}

inline Json eqfinal_to_json(const EqFinalResult& e) {
    Json j;
    j["lhs"] = e.lhs;
    j["rhs"] = e.rhs;
    j["gap"] = e.gap;
    return j;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scenario pipeline

struct ScenarioOptions {
    std::string format = "machine";      // machine | text
    std::string tol_profile = "default"; // default | strict
    int threads = 1;
};

namespace detail {

inline void render_text(const Json& rep, std::ostream& os) {
    os << "instance " << rep.at("instance").at("name").get<std::string>() << " ("
       << rep.at("instance").at("kind").get<std::string>() << ")\n";
    if (rep.contains("hypotheses")) {
        const Json& h = rep.at("hypotheses");
        os << "  slater: " << (h.at("slater").at("found").get<bool>() ? "found" : "not_found");
        if (h.at("slater").at("found").get<bool>())
            os << " (margin " << h.at("slater").at("margin").dump() << ")";
        os << ", bounded: " << h.at("bounded").get<std::string>()
           << ", nonempty: " << (h.at("nonempty").get<bool>() ? "true" : "false") << "\n";
    }
    if (rep.contains("certificate") && !rep.at("certificate").is_null()) {
        const Json& c = rep.at("certificate");
        os << "  certificate: alpha = " << c.at("alpha").dump() << " ("
           << c.at("status").get<std::string>() << ", diam " << c.at("diam").at("value").dump()
           << " / margin " << c.at("margin").dump() << ")\n";
    } else if (rep.contains("outcome")) {
        os << "  outcome: " << rep.at("outcome").get<std::string>();
        if (rep.contains("reason")) os << " -- " << rep.at("reason").get<std::string>();
        os << "\n";
    }
    if (rep.contains("validation")) {
        const Json& v = rep.at("validation");
        os << "  empirical alpha = " << v.at("empirical_alpha").dump();
        if (v.contains("sound")) os << ", sound = " << (v.at("sound").get<bool>() ? "yes" : "NO");
        os << "\n";
        if (v.contains("plateau_trace")) {
            os << "  plateau:";
            for (const auto& e : v.at("plateau_trace"))
                os << " (" << e.at("radius").dump() << " -> " << e.at("alpha").dump() << ")";
            os << "\n";
        }
    }
    if (rep.contains("duality")) {
        const Json& d = rep.at("duality");
        os << "  duality sweep: " << d.at("verdict").get<std::string>()
           << ", max_violation = " << d.at("max_violation").dump() << "\n";
    }
    if (rep.contains("eqfinal")) {
        const Json& e = rep.at("eqfinal");
        os << "  eqfinal: lhs = " << e.at("lhs").dump() << ", rhs = " << e.at("rhs").dump()
           << ", gap = " << e.at("gap").dump() << "\n";
    }
    if (rep.contains("checks")) {
        for (const auto& c : rep.at("checks"))
            os << "  check " << c.at("name").get<std::string>() << ": "
               << (c.at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
    }
    os << "exit " << rep.at("exit_code").get<int>() << "\n";
}

} // namespace detail

// Executes certify -> validate -> duality sweep -> eqfinal (vector) or a
// plateau study, as configured in the instance's "scenario" section, and
// writes one report document.
inline int run_scenario(const InstanceSpec& spec, const ScenarioOptions& opt, std::ostream& os) {
    const Tolerances tol =
        opt.tol_profile == "strict" ? Tolerances::strict() : Tolerances::defaults();

    Json rep;
    rep["schema"] = "errb-report/1";
    rep["library_version"] = kVersion;
    rep["norm"] = "euclidean";
    rep["tol_profile"] = opt.tol_profile;
    rep["tolerances"] = detail::tolerances_to_json(tol);
    Json jinst;
    jinst["name"] = spec.problem.name;
    jinst["kind"] = spec.problem.scalar ? "scalar" : "vector";
    jinst["seed"] = spec.sampling.seed;
    rep["instance"] = jinst;

    const Json& sc = spec.scenario;
    auto cfg_num = [&](const char* key, double dflt) {
        return sc.contains(key) ? sc.at(key).get<double>() : dflt;
    };
    auto cfg_int = [&](const char* key, int dflt) {
        return sc.contains(key) ? sc.at(key).get<int>() : dflt;
    };
    std::string expect =
        sc.contains("expect") ? sc.at("expect").get<std::string>() : "certificate";

    std::vector<std::string> checks;
    if (sc.contains("checks")) {
        for (const auto& c : sc.at("checks")) checks.push_back(c.get<std::string>());
    } else if (expect == "quadratic_regime") {
        checks = {"certify", "plateau"};
    } else {
        checks = {"certify", "validate", "duality"};
        if (!spec.problem.scalar) checks.push_back("eqfinal");
    }

    auto has_check = [&](const std::string& name) {
        for (const auto& c : checks)
            if (c == name) return true;
        return false;
    };

    Json check_results = Json::array();
    int exit_code = 0;
    auto record = [&](const std::string& name, bool pass) {
        Json c;
        c["name"] = name;
        c["pass"] = pass;
        check_results.push_back(c);
        return pass;
    };

    try {
        CertifyOutcome outcome = certify(spec.problem, tol);
        rep["hypotheses"] = detail::hypotheses_to_json(outcome.hypotheses);
        rep["outcome"] = outcome.status == CertifyStatus::certificate     ? "certificate"
                         : outcome.status == CertifyStatus::quadratic_regime ? "quadratic_regime"
                                                                            : "refusal";
        if (!outcome.reason.empty()) rep["reason"] = outcome.reason;
        rep["certificate"] =
            outcome.certificate ? detail::certificate_to_json(*outcome.certificate) : Json();

        if (has_check("certify")) {
            bool pass = expect == "quadratic_regime"
                            ? outcome.status == CertifyStatus::quadratic_regime
                            : outcome.status == CertifyStatus::certificate;
            record("certify", pass);
            if (!pass) exit_code = 3;
        }

        // test tripwire: a deliberately injected alpha replaces the certified
        // one in the soundness comparison and the sweep
        std::optional<double> alpha;
        if (outcome.certificate) alpha = outcome.certificate->alpha;
        if (sc.contains("inject_alpha")) alpha = sc.at("inject_alpha").get<double>();

        if (exit_code == 0 && has_check("validate")) {
            ValidationReport v = empirical_alpha(
                spec.problem, cfg_num("radius", spec.sampling.box_halfwidth),
                cfg_int("samples", spec.sampling.count), spec.sampling.seed, alpha, opt.threads,
                tol);
            rep["validation"] = detail::validation_to_json(v);
            bool pass = !v.sound || *v.sound;
            record("validate", pass);
            if (!pass) exit_code = 4;
        }

        if (exit_code == 0 && has_check("duality") && alpha) {
            double a = cfg_num("duality_alpha", *alpha);
            int n = cfg_int("duality_samples", 2000);
            DualitySweepReport d;
            if (spec.problem.scalar) {
                SetSpec S = outcome.solution_set ? *outcome.solution_set
                                                 : solution_set(spec.problem);
                d = lemma1_sweep(*spec.problem.f, S, a, n, spec.sampling.seed, tol);
            } else {
                SetSpec Q = outcome.solution_set ? *outcome.solution_set
                                                 : solution_set(spec.problem);
                d = lemma6_sweep(*spec.problem.g, *spec.problem.K, Q, a, n, spec.sampling.seed,
                                 tol);
            }
            rep["duality"] = detail::sweep_to_json(d);
            bool pass = d.verdict == SweepVerdict::holds;
            record("duality", pass);
            if (!pass) exit_code = 4;
        }

        if (exit_code == 0 && has_check("eqfinal") && !spec.problem.scalar &&
            outcome.hypotheses.slater.found) {
            EqFinalResult e =
                check_eqfinal(*spec.problem.g, *spec.problem.K, outcome.hypotheses.slater.x0, tol);
            rep["eqfinal"] = detail::eqfinal_to_json(e);
            bool pass = e.gap <= 1e-5 * (1.0 + e.lhs);
            record("eqfinal", pass);
            if (!pass) exit_code = 5;
        }

        if (exit_code == 0 && has_check("plateau")) {
            std::vector<double> radii{10.0, 100.0, 1000.0, 10000.0};
            if (sc.contains("plateau_radii")) {
                radii.clear();
                for (const auto& r : sc.at("plateau_radii")) radii.push_back(r.get<double>());
            }
            ValidationReport v = plateau_study(spec.problem, radii,
                                               cfg_int("samples", spec.sampling.count),
                                               spec.sampling.seed, opt.threads, tol);
            rep["validation"] = detail::validation_to_json(v);
            bool pass = true;
            for (std::size_t j = 1; j < v.plateau_trace.size(); ++j)
                if (v.plateau_trace[j].alpha + 1e-12 < v.plateau_trace[j - 1].alpha) pass = false;
            if (v.plateau_trace.size() >= 2) {
                double last = v.plateau_trace.back().alpha;
                double prev = v.plateau_trace[v.plateau_trace.size() - 2].alpha;
                if (prev > 0.0 && last / prev > 1.01) pass = false;
            }
            record("plateau", pass);
            if (!pass) exit_code = 5;
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        rep["internal_error"] = e.what();
        exit_code = 5;
    }

    rep["checks"] = check_results;
    rep["exit_code"] = exit_code;
    if (opt.format == "text")
        detail::render_text(rep, os);
    else
        os << rep.dump(2) << "\n";
    return exit_code;
}

inline int run_scenario_file(const std::string& path, const ScenarioOptions& opt,
                             std::ostream& os) {
    InstanceSpec spec;
    try {
        spec = load_instance(path);
    } catch (const ParseError& e) {
        os << "parse error: " << e.what() << "\n";
        return 2;
    }
    return run_scenario(spec, opt, os);
}

} // namespace errb
