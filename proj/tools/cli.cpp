#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "degchemo/config.hpp"
#include "degchemo/experiments.hpp"
#include "degchemo/norms.hpp"
#include "degchemo/parallel.hpp"
#include "degchemo/trajectory_io.hpp"
#include "json.hpp"

namespace degchemo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliConfig {
    std::string subcommand;
    std::string study;
    std::string config_path;
    std::string outdir = "results";
    std::vector<std::string> overrides;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
};

json read_document(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// A bare model document ({alpha, gamma, beta, ...}) is accepted by `validate`.
bool is_model_document(const json& doc) {
    return doc.is_object() && (doc.contains("alpha") || doc.contains("spec") || doc.contains("constants")) &&
           !doc.contains("model");
}

ExperimentConfig load_config(const CliConfig& cli, bool allow_bare_model) {
    json doc = read_document(cli.config_path);
    if (allow_bare_model && is_model_document(doc)) doc = json{{"model", doc}};
    for (const auto& o : cli.overrides) apply_override(doc, o);
    if (cli.seed) doc["seed"] = *cli.seed;
    return parse_config(doc);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_validate(const CliConfig& cli, std::ostream& out) {
    const ExperimentConfig c = load_config(cli, true);
    const ValidationReport balance = validate_balance(c.model.alpha, c.model.gamma, c.model.beta);
    const ValidationReport structure = validate_assumptions(c.model);
    out << "model " << to_string(c.model.spec.kind) << " alpha=" << num(c.model.alpha)
        << " gamma=" << num(c.model.gamma) << " beta=" << num(c.model.beta) << '\n';
    bool all = true;
    for (const auto* rep : {&balance, &structure}) {
        for (const auto& ch : rep->checks) {
            all = all && ch.pass;
            out << (ch.pass ? "PASS " : "FAIL ") << ch.name << " slack=" << num(ch.slack);
            if (!ch.pass && ch.witness) {
                out << " witness M=" << num(ch.witness->first) << " rho=" << num(ch.witness->second);
            }
            if (!ch.detail.empty()) out << "  (" << ch.detail << ')';
            out << '\n';
        }
    }
    if (balance.all_pass()) out << "kappa=" << num(kappa(c.model)) << '\n';
    out << (all ? "all assumptions hold" : "assumption violated") << '\n';
    return all ? ok : verdict_failure;
}

int cmd_run(const CliConfig& cli, std::ostream& out, std::ostream& err) {
    const ExperimentConfig c = load_config(cli, false);
    const fs::path dir = fs::path(cli.outdir) / "run";
    const State s0 = initial_state(c);
    try {
        const Trajectory tr = evolve(s0, c.model, c.solver);
        save_trajectory(dir, tr, to_json(c), to_json(c.model));
        const State& last = tr.snapshots.back();
        out << "t=" << num(last.time) << " steps=" << tr.steps << " snapshots=" << tr.snapshots.size()
            << " |M|_inf=" << num(lp_norm(last.M, INFINITY)) << " |M|_L1=" << num(lp_norm(last.M, 1.0))
            << " |rho|_inf=" << num(lp_norm(last.rho, INFINITY)) << " dir=" << dir.string() << '\n';
        return ok;
    } catch (const StepFailure& e) {
        const fs::path diag = dir / "failure";
        Trajectory snap;
        snap.snapshots.push_back(e.last_good());
        save_trajectory(diag, snap, to_json(c), to_json(c.model));
        err << "solver failure: " << e.what() << "\ndiagnostic snapshot: " << diag.string() << '\n';
        return solver_failure;
    }
}

int cmd_study(const CliConfig& cli, std::ostream& out) {
    const ExperimentConfig c = load_config(cli, false);
    RunOptions opt;
    opt.threads = cli.threads;
    const ExperimentReport r = run_study(cli.study, c, opt);
    const fs::path dir = write_report(cli.outdir, r, c);
    for (const auto& v : r.verdicts) {
        out << (v.pass ? "PASS " : "FAIL ") << v.name << " value=" << num(v.value)
            << " threshold=" << num(v.threshold) << " [" << v.tolerance << "]";
        if (cli.verbosity > 0) out << "  " << v.detail;
        out << '\n';
    }
    for (const auto& n : r.notes) out << "note: " << n << '\n';
    if (cli.verbosity > 0) {
        for (auto it = r.aggregate.begin(); it != r.aggregate.end(); ++it) {
            out << "  " << it.key() << " = " << it.value().dump() << '\n';
        }
    }
    out << r.study << ": " << (r.pass() ? "pass" : "FAIL") << " -> " << (dir / "report.json").string() << '\n';
    return r.pass() ? ok : verdict_failure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliConfig cli;
    CLI::App app{"Degenerate chemotaxis solver and study runner", "degchemo"};
    app.require_subcommand(1);
    app.add_option("--config", cli.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", cli.outdir, "output directory");
    app.add_option("--set", cli.overrides, "dotted-path override key=value (repeatable)")->take_all();
    app.add_option("--threads", cli.threads, "worker threads for ensemble fan-out")->check(CLI::PositiveNumber);
    app.add_option("--seed", cli.seed, "RNG seed (overrides the config)");
    app.add_flag("-v,--verbose", cli.verbosity, "more output");

    app.add_subcommand("validate", "check balance and structural assumptions of the model")->fallthrough();
    app.add_subcommand("run", "evolve the configured initial state and write a trajectory")->fallthrough();
    auto* study = app.add_subcommand("study", "run a named study and write its report")->fallthrough();
    study->add_option("name", cli.study, "study name")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return usage_error;
    }
    if (cli.threads == 0) cli.threads = default_threads();
    cli.subcommand = app.get_subcommands().front()->get_name();

    try {
        if (cli.subcommand == "validate") return cmd_validate(cli, out);
        if (cli.subcommand == "run") return cmd_run(cli, out, err);
        return cmd_study(cli, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return usage_error;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return usage_error;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return usage_error;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return solver_failure;
    }
}

}  // namespace degchemo::cli
