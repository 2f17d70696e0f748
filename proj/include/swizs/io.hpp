#pragma once
// Configuration parsing (JSON), result serialization (CSV long format +
// JSON), run manifests, and a small SVG plot writer.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swizs/experiments.hpp"

namespace swizs {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string experiment;           // study preset name or "coverage"
    std::string model;
    Vec theta0;
    int n = 0;
    int m = 0;                        // replicates (LMM); 0 = model default
    int M = 100;
    int S = 500;
    std::vector<double> levels = {0.50, 0.75, 0.90, 0.95, 0.99};
    std::vector<std::string> methods = {"swizs"};
    uint64_t seed = 1;
    SolverConfig solver;
    std::string output_dir = "out";
    bool start_at_theta0 = false;
    int threads = 1;
};

inline std::string join_ids(const std::vector<std::string>& ids) {
    std::string s;
    for (size_t i = 0; i < ids.size(); ++i)
        s += (i ? ", " : "") + ids[i];
    return s;
}

// Parse and validate a run configuration.  Unknown models or experiments,
// wrong types, and out-of-range sizes raise ConfigError.
inline RunConfig parse_config(const json& j) {
    RunConfig c;
    try {
        if (j.contains("experiment")) c.experiment = j.at("experiment");
        if (!c.experiment.empty() && c.experiment != "coverage") {
            const auto names = study_names();
            if (std::find(names.begin(), names.end(), c.experiment)
                == names.end())
                throw ConfigError("unknown experiment '" + c.experiment
                                  + "'; registered: coverage, "
                                  + join_ids(names));
            Study s = make_study(c.experiment);
            c.model = s.model_id;
            c.n = s.n;
            c.m = s.model_opt.m;
            c.theta0 = s.theta0;
            c.levels = s.coverage.levels;
            c.methods = s.coverage.methods;
            c.M = s.coverage.M;
            c.S = s.coverage.S;
            c.start_at_theta0 = s.coverage.start_at_theta0;
        }
        if (j.contains("model")) c.model = j.at("model");
        {
            const auto ids = model_ids();
            if (std::find(ids.begin(), ids.end(), c.model) == ids.end())
                throw ConfigError("unknown model '" + c.model
                                  + "'; registered: " + join_ids(ids));
        }
        if (j.contains("theta0")) {
            const auto& t = j.at("theta0");
            c.theta0.resize(t.size());
            for (size_t i = 0; i < t.size(); ++i)
                c.theta0[i] = t[i].get<double>();
        }
        if (j.contains("n")) c.n = j.at("n");
        if (j.contains("m")) c.m = j.at("m");
        if (j.contains("M")) c.M = j.at("M");
        if (j.contains("S")) c.S = j.at("S");
        if (j.contains("levels")) {
            c.levels.clear();
            for (const auto& l : j.at("levels"))
                c.levels.push_back(l.get<double>());
        }
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& mth : j.at("methods"))
                c.methods.push_back(mth.get<std::string>());
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            if (s.contains("abs_tol")) c.solver.abs_tol = s.at("abs_tol");
            if (s.contains("step_tol")) c.solver.step_tol = s.at("step_tol");
            if (s.contains("max_iter")) c.solver.max_iter = s.at("max_iter");
            if (s.contains("max_backtrack"))
                c.solver.max_backtrack = s.at("max_backtrack");
        }
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir");
        if (j.contains("start_at_theta0"))
            c.start_at_theta0 = j.at("start_at_theta0");
        if (j.contains("threads")) c.threads = j.at("threads");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    // SWIZS_SEED environment variable overrides the config seed.
    if (const char* env = std::getenv("SWIZS_SEED")) {
        try {
            c.seed = std::stoull(env);
        } catch (...) {
            throw ConfigError("SWIZS_SEED is not an integer: "
                              + std::string(env));
        }
    }

    if (c.n <= 0) throw ConfigError("n must be positive");
    if (c.M <= 0 || c.S <= 0) throw ConfigError("M and S must be positive");
    if (c.theta0.size() == 0) throw ConfigError("theta0 is required");
    for (double l : c.levels)
        if (!(l > 0.0 && l < 1.0))
            throw ConfigError("levels must lie in (0,1)");
    if (c.methods.empty()) throw ConfigError("methods must be non-empty");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");

    // Validate theta0 against the model dimension.
    ModelOptions mo;
    if (c.m > 0) mo.m = c.m;
    Model mdl = make_model(c.model, c.n, mo);
    if (mdl.p != c.theta0.size())
        throw ConfigError("theta0 has size "
                          + std::to_string(c.theta0.size()) + " but model "
                          + c.model + " expects " + std::to_string(mdl.p));
    for (int k = 0; k < mdl.p; ++k)
        if (mdl.theta_positive[k] && !(c.theta0[k] > 0.0))
            throw ConfigError("theta0[" + std::to_string(k)
                              + "] must be positive for model " + c.model);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return parse_config(j);
}

// ---- CSV / JSON writers -------------------------------------------------

inline void write_posterior_csv(std::ostream& out, const PosteriorDraws& d) {
    const int p = static_cast<int>(d.theta.cols());
    out << "s";
    for (int j = 0; j < p; ++j) out << ",theta_" << (j + 1);
    out << ",converged,residual\n";
    out.precision(17);
    for (int s = 0; s < d.theta.rows(); ++s) {
        out << s;
        for (int j = 0; j < p; ++j) out << ',' << d.theta(s, j);
        out << ',' << (d.converged[s] ? 1 : 0) << ',' << d.residual[s]
            << '\n';
    }
}

inline void write_coverage_csv(std::ostream& out, const CoverageReport& r) {
    out << "method,quantity,level,coverage,median_length,mean_length,"
           "valid_trials,invalid_trials\n";
    out.precision(12);
    for (const auto& row : r.rows)
        out << row.method << ',' << row.quantity << ',' << row.level << ','
            << row.coverage << ',' << row.median_length << ','
            << row.mean_length << ',' << row.valid_trials << ','
            << row.invalid_trials << '\n';
}

inline json coverage_to_json(const CoverageReport& r) {
    json j;
    j["model"] = r.model;
    j["n"] = r.n;
    j["M"] = r.M;
    j["S"] = r.S;
    j["seed"] = r.seed;
    j["levels"] = r.levels;
    j["interval_type"] = "equal-tailed";
    j["theta0"] = std::vector<double>(r.theta0.data(),
                                      r.theta0.data() + r.theta0.size());
    j["rows"] = json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"method", row.method},
                             {"quantity", row.quantity},
                             {"level", row.level},
                             {"coverage", row.coverage},
                             {"median_length", row.median_length},
                             {"mean_length", row.mean_length},
                             {"valid_trials", row.valid_trials},
                             {"invalid_trials", row.invalid_trials}});
    j["summaries"] = json::array();
    for (const auto& s : r.summaries)
        j["summaries"].push_back({{"method", s.method},
                                  {"quantities", s.quantities},
                                  {"bias", s.bias},
                                  {"rmse", s.rmse},
                                  {"mad", s.mad},
                                  {"valid_trials", s.valid_trials},
                                  {"invalid_trials", s.invalid_trials},
                                  {"mean_failed_fraction",
                                   s.mean_failed_fraction},
                                  {"seconds", s.seconds}});
    return j;
}

// ---- run manifest ---------------------------------------------------------

inline std::string timestamp_utc() {
    char buf[32];
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Written atomically (tmp file + rename) before any results, so a results
// directory always either has a complete manifest or none.
inline std::filesystem::path write_manifest(
    const std::filesystem::path& dir, const json& config_snapshot,
    uint64_t seed, const std::vector<std::string>& outputs) {
    std::filesystem::create_directories(dir);
    json m;
    m["config"] = config_snapshot;
    m["seed"] = seed;
    m["version"] = "swizs-lab 1.0";
    m["started"] = timestamp_utc();
    m["outputs"] = outputs;
    const auto path = dir / "manifest.json";
    const auto tmp = dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        out << m.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
    return path;
}

// ---- data input -------------------------------------------------------------

// Numeric CSV (no header, or a non-numeric first line that is skipped);
// returns a matrix with one row per line.
inline Mat read_data_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool ok = true;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (...) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            if (first) { first = false; continue; }  // header line
            throw ConfigError("non-numeric cell in " + path + ": " + line);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("no data rows in " + path);
    Mat x(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows.front().size(); ++j)
            x(i, j) = rows[i][j];
    return x;
}

// ---- SVG plot ---------------------------------------------------------------

// Coverage-vs-level chart: one polyline per method for a given quantity,
// plus the nominal diagonal.
inline void write_coverage_svg(std::ostream& out, const CoverageReport& r,
                               const std::string& quantity) {
    const double W = 480, H = 360, L = 60, B = 40;
    auto sx = [&](double lvl) { return L + lvl * (W - L - 20); };
    auto sy = [&](double cov) { return H - B - cov * (H - B - 20); };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\""
        << sx(1) << "\" y2=\"" << sy(0) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\""
        << sx(0) << "\" y2=\"" << sy(1) << "\" stroke=\"black\"/>\n";
    // nominal diagonal
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\""
        << sx(1) << "\" y2=\"" << sy(1)
        << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                            "#ff7f0e"};
    int ci = 0;
    for (const auto& s : r.summaries) {
        std::ostringstream pts;
        for (double lvl : r.levels) {
            const auto& row = r.row(s.method, quantity, lvl);
            if (std::isnan(row.coverage)) continue;
            pts << sx(lvl) << ',' << sy(row.coverage) << ' ';
        }
        const char* col = colors[ci % 5];
        out << "<polyline fill=\"none\" stroke=\"" << col
            << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
        out << "<text x=\"" << L + 10 << "\" y=\"" << 30 + 16 * ci
            << "\" fill=\"" << col << "\" font-size=\"13\">" << s.method
            << "</text>\n";
        ++ci;
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 8
        << "\" font-size=\"13\" text-anchor=\"middle\">nominal level ("
        << quantity << ")</text>\n";
    out << "</svg>\n";
}

} // namespace swizs
