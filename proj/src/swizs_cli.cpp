// swizs-lab: configuration-driven runner for simulation-based inference
// experiments.  Subcommands: run, posterior, report, plot, list-models.
// Exit codes: 0 success, 2 configuration error, 3 experiment failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "swizs/io.hpp"

namespace fs = std::filesystem;
using namespace swizs;

namespace {

constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_EXPERIMENT = 3;

int cmd_run(const std::string& config_path, bool dry_run, int threads) {
    RunConfig cfg;
    json snapshot;
    try {
        {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config file: "
                                       + config_path);
            in >> snapshot;
        }
        cfg = parse_config(snapshot);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return EXIT_CONFIG;
    } catch (const json::exception& e) {
        std::cerr << "config error: invalid JSON: " << e.what() << '\n';
        return EXIT_CONFIG;
    }
    if (threads > 0) cfg.threads = threads;

    std::cout << "plan: model=" << cfg.model << " n=" << cfg.n
              << " M=" << cfg.M << " S=" << cfg.S << " seed=" << cfg.seed
              << " threads=" << cfg.threads << " methods=";
    for (size_t i = 0; i < cfg.methods.size(); ++i)
        std::cout << (i ? "," : "") << cfg.methods[i];
    std::cout << " output_dir=" << cfg.output_dir << '\n';
    if (dry_run) {
        std::cout << "dry run: nothing written\n";
        return 0;
    }

    try {
        ModelOptions mo;
        if (cfg.m > 0) mo.m = cfg.m;
        Model model = make_model(cfg.model, cfg.n, mo);

        CoverageOptions opt;
        opt.M = cfg.M;
        opt.S = cfg.S;
        opt.levels = cfg.levels;
        opt.methods = cfg.methods;
        opt.seed = cfg.seed;
        opt.cfg = cfg.solver;
        opt.threads = cfg.threads;
        opt.start_at_theta0 = cfg.start_at_theta0;
        opt.model_opt = mo;
        if (!cfg.experiment.empty() && cfg.experiment != "coverage")
            opt.functionals = make_study(cfg.experiment).coverage.functionals;

        const fs::path dir(cfg.output_dir);
        write_manifest(dir, snapshot, cfg.seed,
                       {"coverage.csv", "coverage.json"});

        CoverageReport rep = run_coverage(model, cfg.theta0, opt);

        bool any_valid = false;
        for (const auto& s : rep.summaries)
            if (s.valid_trials > 0) any_valid = true;
        if (!any_valid) {
            std::cerr << "experiment failure: no valid trials\n";
            return EXIT_EXPERIMENT;
        }

        {
            std::ofstream out(dir / "coverage.csv");
            write_coverage_csv(out, rep);
        }
        {
            std::ofstream out(dir / "coverage.json");
            out << coverage_to_json(rep).dump(2) << '\n';
        }
        std::cout << "wrote " << (dir / "coverage.csv").string() << " and "
                  << (dir / "coverage.json").string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "experiment failure: " << e.what() << '\n';
        return EXIT_EXPERIMENT;
    }
}

int cmd_posterior(const std::string& model_id, const std::string& data_path,
                  int S, uint64_t seed, const std::string& out_path,
                  int threads) {
    try {
        Mat x0 = read_data_csv(data_path);
        const auto ids = model_ids();
        if (std::find(ids.begin(), ids.end(), model_id) == ids.end())
            throw ConfigError("unknown model '" + model_id
                              + "'; registered: " + join_ids(ids));
        Model m = make_model(model_id, static_cast<int>(x0.rows()));
        if (x0.cols() != m.d)
            throw ConfigError("data has " + std::to_string(x0.cols())
                              + " columns but model " + model_id
                              + " expects " + std::to_string(m.d));
        SolveResult aux = fit_auxiliary(m, x0);
        if (!aux.converged) {
            std::cerr << "experiment failure: auxiliary fit did not "
                         "converge\n";
            return EXIT_EXPERIMENT;
        }
        PosteriorDraws d = swizs_posterior(m, aux.x, seed, 0, S, {}, Vec(),
                                           threads > 0 ? threads : 1);
        if (out_path.empty()) {
            write_posterior_csv(std::cout, d);
        } else {
            std::ofstream out(out_path);
            write_posterior_csv(out, d);
            std::cout << "wrote " << out_path << '\n';
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return EXIT_CONFIG;
    } catch (const std::exception& e) {
        std::cerr << "experiment failure: " << e.what() << '\n';
        return EXIT_EXPERIMENT;
    }
}

int cmd_report(const std::string& dir) {
    const fs::path manifest = fs::path(dir) / "manifest.json";
    if (!fs::exists(manifest)) {
        std::cerr << "no runs found: missing " << manifest.string() << '\n';
        return EXIT_EXPERIMENT;
    }
    const fs::path results = fs::path(dir) / "coverage.json";
    if (!fs::exists(results)) {
        std::cerr << "no runs found: missing " << results.string() << '\n';
        return EXIT_EXPERIMENT;
    }
    json j;
    {
        std::ifstream in(results);
        in >> j;
    }
    std::cout << "model " << j["model"].get<std::string>() << "  n="
              << j["n"] << "  M=" << j["M"] << "  S=" << j["S"] << "  seed="
              << j["seed"] << '\n';
    std::cout << "method      quantity      level   coverage   med.length\n";
    char buf[160];
    for (const auto& row : j["rows"]) {
        std::snprintf(buf, sizeof buf, "%-11s %-13s %5.2f   %8.4f   %10.4f",
                      row["method"].get<std::string>().c_str(),
                      row["quantity"].get<std::string>().c_str(),
                      row["level"].get<double>(),
                      row["coverage"].get<double>(),
                      row["median_length"].get<double>());
        std::cout << buf << '\n';
    }
    return 0;
}

int cmd_plot(const std::string& dir, std::string quantity,
             std::string out_path) {
    const fs::path results = fs::path(dir) / "coverage.json";
    if (!fs::exists(results)) {
        std::cerr << "no runs found: missing " << results.string() << '\n';
        return EXIT_EXPERIMENT;
    }
    json j;
    {
        std::ifstream in(results);
        in >> j;
    }
    // Rebuild the report pieces needed for plotting.
    CoverageReport rep;
    rep.model = j["model"];
    for (const auto& l : j["levels"]) rep.levels.push_back(l.get<double>());
    for (const auto& row : j["rows"]) {
        CoverageRow r;
        r.method = row["method"];
        r.quantity = row["quantity"];
        r.level = row["level"];
        r.coverage = row["coverage"];
        r.median_length = row["median_length"];
        rep.rows.push_back(std::move(r));
    }
    for (const auto& s : j["summaries"]) {
        MethodSummary ms;
        ms.method = s["method"];
        rep.summaries.push_back(std::move(ms));
    }
    if (quantity.empty()) quantity = j["rows"][0]["quantity"];
    if (out_path.empty())
        out_path = (fs::path(dir) / ("coverage_" + quantity + ".svg"))
                       .string();
    std::ofstream out(out_path);
    write_coverage_svg(out, rep, quantity);
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"swizs-lab: simulation-based inference experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a coverage experiment from a "
                                          "JSON config");
    std::string config_path;
    bool dry_run = false;
    int threads = 0;
    run->add_option("config", config_path, "path to JSON config")->required();
    run->add_flag("--dry-run", dry_run, "validate and print the plan only");
    run->add_option("--threads", threads, "worker threads (default: config)");

    auto* post = app.add_subcommand("posterior", "posterior draws for an "
                                                 "observed data CSV");
    std::string model_id, data_path, out_path;
    int S = 1000;
    uint64_t seed = 1;
    post->add_option("--model", model_id, "model id")->required();
    post->add_option("--data", data_path, "numeric CSV of observations")
        ->required();
    post->add_option("--S", S, "number of posterior draws");
    post->add_option("--seed", seed, "RNG seed");
    post->add_option("-o,--output", out_path, "output CSV (default stdout)");
    post->add_option("--threads", threads, "worker threads");

    auto* report = app.add_subcommand("report", "print a results table");
    std::string results_dir;
    report->add_option("dir", results_dir, "results directory")->required();

    auto* plot = app.add_subcommand("plot", "write a coverage-vs-level SVG");
    std::string plot_dir, plot_quantity, plot_out;
    plot->add_option("dir", plot_dir, "results directory")->required();
    plot->add_option("--quantity", plot_quantity,
                     "quantity to plot (default: first)");
    plot->add_option("-o,--output", plot_out, "output SVG path");

    auto* lm = app.add_subcommand("list-models", "list registered model and "
                                                 "experiment ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : EXIT_CONFIG;
    }

    if (run->parsed()) return cmd_run(config_path, dry_run, threads);
    if (post->parsed())
        return cmd_posterior(model_id, data_path, S, seed, out_path, threads);
    if (report->parsed()) return cmd_report(results_dir);
    if (plot->parsed()) return cmd_plot(plot_dir, plot_quantity, plot_out);
    if (lm->parsed()) {
        std::cout << "models:\n";
        for (const auto& id : model_ids()) std::cout << "  " << id << '\n';
        std::cout << "experiments:\n  coverage\n";
        for (const auto& s : study_names()) std::cout << "  " << s << '\n';
        return 0;
    }
    return EXIT_CONFIG;
}
