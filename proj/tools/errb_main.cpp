// errb: certify, validate and stress-test global error-bound constants for
// convex inequality systems.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "errb/report.hpp"

namespace {

using namespace errb;

struct GlobalOpts {
    std::string format = "text";
    std::string tol_profile = "default";
    int threads = 1;
};

Tolerances tolerances_of(const GlobalOpts& g) {
    return g.tol_profile == "strict" ? Tolerances::strict() : Tolerances::defaults();
}

std::optional<InstanceSpec> load_or_report(const std::string& path) {
    try {
        return load_instance(path);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return std::nullopt;
    }
}

void emit(const Json& doc, const GlobalOpts& g) {
    if (g.format == "machine")
        std::cout << doc.dump(2) << "\n";
    else if (doc.contains("exit_code"))
        errb::detail::render_text(doc, std::cout);
    else
        std::cout << doc.dump(2) << "\n";
}

Json base_report(const InstanceSpec& spec, const GlobalOpts& g) {
    Json rep;
    rep["schema"] = "errb-report/1";
    rep["library_version"] = kVersion;
    rep["norm"] = "euclidean";
    rep["tol_profile"] = g.tol_profile;
    Json jinst;
    jinst["name"] = spec.problem.name;
    jinst["kind"] = spec.problem.scalar ? "scalar" : "vector";
    jinst["seed"] = spec.sampling.seed;
    rep["instance"] = jinst;
    return rep;
}

Vec parse_point(const std::string& s) {
    Vec v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
}

int cmd_certify(const std::string& path, const GlobalOpts& g) {
    auto spec = load_or_report(path);
    if (!spec) return 2;
    try {
        CertifyOutcome out = certify(spec->problem, tolerances_of(g));
        Json rep = base_report(*spec, g);
        rep["hypotheses"] = errb::detail::hypotheses_to_json(out.hypotheses);
        rep["outcome"] = out.status == CertifyStatus::certificate     ? "certificate"
                         : out.status == CertifyStatus::quadratic_regime ? "quadratic_regime"
                                                                        : "refusal";
        if (!out.reason.empty()) rep["reason"] = out.reason;
        rep["certificate"] =
            out.certificate ? errb::detail::certificate_to_json(*out.certificate) : Json();
        rep["exit_code"] = out.status == CertifyStatus::refusal ? 3 : 0;
        emit(rep, g);
        return out.status == CertifyStatus::refusal ? 3 : 0;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 5;
    }
}

int cmd_validate(const std::string& path, const GlobalOpts& g, std::optional<double> radius,
                 std::optional<int> samples, std::optional<std::uint64_t> seed) {
    auto spec = load_or_report(path);
    if (!spec) return 2;
    try {
        const Tolerances tol = tolerances_of(g);
        CertifyOutcome out = certify(spec->problem, tol);
        std::optional<double> alpha;
        if (out.certificate) alpha = out.certificate->alpha;
        ValidationReport v = empirical_alpha(
            spec->problem, radius.value_or(spec->sampling.box_halfwidth),
            samples.value_or(spec->sampling.count), seed.value_or(spec->sampling.seed), alpha,
            g.threads, tol);
        Json rep = base_report(*spec, g);
        rep["hypotheses"] = errb::detail::hypotheses_to_json(out.hypotheses);
        rep["certificate"] =
            out.certificate ? errb::detail::certificate_to_json(*out.certificate) : Json();
        rep["validation"] = errb::detail::validation_to_json(v);
        int code = (v.sound && !*v.sound) ? 4 : 0;
        rep["exit_code"] = code;
        emit(rep, g);
        return code;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 5;
    }
}

int cmd_duality(const std::string& path, const GlobalOpts& g, std::optional<double> alpha_opt,
                std::optional<int> samples, std::optional<std::uint64_t> seed) {
    auto spec = load_or_report(path);
    if (!spec) return 2;
    try {
        const Tolerances tol = tolerances_of(g);
        CertifyOutcome out = certify(spec->problem, tol);
        double alpha;
        if (alpha_opt) {
            alpha = *alpha_opt;
        } else if (out.certificate) {
            alpha = out.certificate->alpha;
        } else {
            std::cerr << "no certificate available; pass --alpha\n";
            return 3;
        }
        SetSpec S = out.solution_set ? *out.solution_set : solution_set(spec->problem);
        DualitySweepReport d;
        int n = samples.value_or(2000);
        std::uint64_t sd = seed.value_or(spec->sampling.seed);
        if (spec->problem.scalar)
            d = lemma1_sweep(*spec->problem.f, S, alpha, n, sd, tol);
        else
            d = lemma6_sweep(*spec->problem.g, *spec->problem.K, S, alpha, n, sd, tol);
        Json rep = base_report(*spec, g);
        rep["alpha"] = alpha;
        rep["duality"] = errb::detail::sweep_to_json(d);
        int code = d.verdict == SweepVerdict::holds ? 0 : 4;
        rep["exit_code"] = code;
        emit(rep, g);
        return code;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 5;
    }
}

int cmd_eqfinal(const std::string& path, const GlobalOpts& g) {
    auto spec = load_or_report(path);
    if (!spec) return 2;
    if (spec->problem.scalar) {
        std::cerr << "eqfinal needs a vector instance\n";
        return 2;
    }
    try {
        const Tolerances tol = tolerances_of(g);
        SlaterResult sl =
            find_slater_vector(*spec->problem.g, *spec->problem.K, spec->problem.slater_hint, tol);
        if (!sl.found) {
            std::cerr << "slater: not_found\n";
            return 3;
        }
        EqFinalResult e = check_eqfinal(*spec->problem.g, *spec->problem.K, sl.x0, tol);
        Json rep = base_report(*spec, g);
        rep["eqfinal"] = errb::detail::eqfinal_to_json(e);
        int code = e.gap <= 1e-5 * (1.0 + e.lhs) ? 0 : 5;
        rep["exit_code"] = code;
        emit(rep, g);
        return code;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 5;
    }
}

int cmd_oracle(const std::string& path, const GlobalOpts& g, const std::string& what,
               const std::string& point, double halfwidth, double resolution) {
    auto spec = load_or_report(path);
    if (!spec) return 2;
    try {
        Vec p = parse_point(point);
        Json rep = base_report(*spec, g);
        rep["what"] = what;
        rep["point"] = errb::detail::vec_to_json(p);
        if (what == "conjugate") {
            if (!spec->problem.scalar) {
                std::cerr << "conjugate oracle needs a scalar instance\n";
                return 2;
            }
            OracleValue v = oracle_conjugate(*spec->problem.f, p, halfwidth, resolution);
            rep["value"] = v.value;
            rep["max_on_boundary"] = v.max_on_boundary;
        } else if (what == "distance") {
            SetSpec S = solution_set(spec->problem);
            rep["value"] = oracle_distance(S, p, halfwidth, resolution, tolerances_of(g));
        } else {
            std::cerr << "--what must be conjugate or distance\n";
            return 2;
        }
        rep["exit_code"] = 0;
        emit(rep, g);
        return 0;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 5;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified global error bounds for convex inequality systems"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--format", g.format, "report format")
        ->check(CLI::IsMember({"text", "machine"}));
    app.add_option("--tol-profile", g.tol_profile, "tolerance profile")
        ->check(CLI::IsMember({"default", "strict"}));
    app.add_option("--threads", g.threads, "worker threads for sampling")
        ->check(CLI::PositiveNumber);

    std::string path;
    std::optional<double> radius, alpha;
    std::optional<int> samples;
    std::optional<std::uint64_t> seed;
    std::string what = "conjugate", point = "0";
    double halfwidth = 10.0, resolution = 1e-3;
    std::string out_path;

    auto* c_cert = app.add_subcommand("certify", "hypothesis checks and certificate");
    c_cert->add_option("file", path)->required();

    auto* c_val = app.add_subcommand("validate", "sampling-based empirical constant");
    c_val->add_option("file", path)->required();
    c_val->add_option("--radius", radius);
    c_val->add_option("--samples", samples);
    c_val->add_option("--seed", seed);

    auto* c_dual = app.add_subcommand("duality", "Lemma 1 / Lemma 6 sweep");
    c_dual->add_option("file", path)->required();
    c_dual->add_option("--alpha", alpha);
    c_dual->add_option("--samples", samples);
    c_dual->add_option("--seed", seed);

    auto* c_eq = app.add_subcommand("eqfinal", "distance-vs-inclusion equivalence");
    c_eq->add_option("file", path)->required();

    auto* c_orc = app.add_subcommand("oracle", "brute-force grid oracles");
    c_orc->add_option("file", path)->required();
    c_orc->add_option("--what", what)->check(CLI::IsMember({"conjugate", "distance"}));
    c_orc->add_option("--point", point, "comma-separated coordinates")->required();
    c_orc->add_option("--halfwidth", halfwidth);
    c_orc->add_option("--resolution", resolution);

    auto* c_scn = app.add_subcommand("scenario", "full pipeline with exit-code contract");
    c_scn->add_option("file", path)->required();
    c_scn->add_option("--out", out_path, "write the report to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (c_cert->parsed()) return cmd_certify(path, g);
    if (c_val->parsed()) return cmd_validate(path, g, radius, samples, seed);
    if (c_dual->parsed()) return cmd_duality(path, g, alpha, samples, seed);
    if (c_eq->parsed()) return cmd_eqfinal(path, g);
    if (c_orc->parsed()) return cmd_oracle(path, g, what, point, halfwidth, resolution);
    if (c_scn->parsed()) {
        errb::ScenarioOptions opt;
        opt.format = g.format == "text" ? "text" : "machine";
        opt.tol_profile = g.tol_profile;
        opt.threads = g.threads;
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "cannot open " << out_path << "\n";
                return 5;
            }
            return errb::run_scenario_file(path, opt, out);
        }
        return errb::run_scenario_file(path, opt, std::cout);
    }
    return 0;
}
