#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swizs/io.hpp"

using namespace swizs;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code;
    std::string out;
};

CmdResult run_cli(const std::string& args) {
    const std::string outfile =
        (fs::temp_directory_path() / "swizs_cli_out.txt").string();
    const std::string cmd = std::string(SWIZS_CLI_PATH) + " " + args + " >"
                            + outfile + " 2>&1";
    const int raw = std::system(cmd.c_str());
    std::ifstream in(outfile);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(raw), ss.str()};
}

fs::path temp_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("config parsing: validation and env seed override") {
    json j = {{"model", "expo_rate"}, {"theta0", {2.0}}, {"n", 20},
              {"M", 10}, {"S", 20}, {"seed", 5}};
    RunConfig c = parse_config(j);
    CHECK(c.model == "expo_rate");
    CHECK(c.seed == 5);
    CHECK(c.theta0[0] == 2.0);

    setenv("SWIZS_SEED", "99", 1);
    CHECK(parse_config(j).seed == 99);
    setenv("SWIZS_SEED", "abc", 1);
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    unsetenv("SWIZS_SEED");

    json bad = j;
    bad["model"] = "bogus";
    try {
        parse_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        // Error message lists registered ids.
        CHECK(std::string(e.what()).find("expo_rate") != std::string::npos);
    }
    bad = j; bad["n"] = -5;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = j; bad["theta0"] = {-2.0};  // rate must be positive
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = j; bad["theta0"] = {1.0, 2.0};  // wrong dimension
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = j; bad["levels"] = {1.5};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    // Study preset fills the defaults.
    RunConfig st = parse_config(json{{"experiment", "student_t"}});
    CHECK(st.model == "student_t");
    CHECK(st.n == 50);
    CHECK(st.theta0[0] == 1.5);
    CHECK_THROWS_AS(parse_config(json{{"experiment", "bogus"}}), ConfigError);
}

TEST_CASE("posterior CSV writer layout") {
    PosteriorDraws d;
    d.theta.resize(2, 2);
    d.theta << 1.0, 2.0, 3.0, 4.0;
    d.converged = {true, false};
    d.residual = (Vec(2) << 1e-12, 0.5).finished();
    std::ostringstream ss;
    write_posterior_csv(ss, d);
    std::string line;
    std::istringstream in(ss.str());
    std::getline(in, line);
    CHECK(line == "s,theta_1,theta_2,converged,residual");
    std::getline(in, line);
    CHECK(line.substr(0, 6) == "0,1,2,");
    std::getline(in, line);
    CHECK(line.find(",0,") != std::string::npos);  // non-converged flag
}

TEST_CASE("read_data_csv accepts headers and rejects ragged input") {
    fs::path d = temp_dir("swizs_csv_test");
    {
        std::ofstream out(d / "ok.csv");
        out << "x\n1.5\n2.5\n3.5\n";
    }
    Mat x = read_data_csv((d / "ok.csv").string());
    CHECK(x.rows() == 3);
    CHECK(x(2, 0) == 3.5);
    {
        std::ofstream out(d / "ragged.csv");
        out << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_data_csv((d / "ragged.csv").string()), ConfigError);
    CHECK_THROWS_AS(read_data_csv((d / "missing.csv").string()), ConfigError);
}

TEST_CASE("cli: list-models, dry-run, bad config exit codes") {
    CmdResult lm = run_cli("list-models");
    CHECK(lm.code == 0);
    CHECK(lm.out.find("expo_rate") != std::string::npos);
    CHECK(lm.out.find("mg1") != std::string::npos);

    const std::string cfg =
        std::string(SWIZS_CONFIG_DIR) + "/expo_coverage.json";
    CmdResult dry = run_cli("run --dry-run " + cfg);
    CHECK(dry.code == 0);
    CHECK(dry.out.find("plan:") != std::string::npos);
    CHECK(dry.out.find("nothing written") != std::string::npos);

    CmdResult missing = run_cli("run /nonexistent.json");
    CHECK(missing.code == 2);
    fs::path d = temp_dir("swizs_cli_badcfg");
    {
        std::ofstream out(d / "bad.json");
        out << "{\"model\": \"bogus\", \"theta0\": [1], \"n\": 10}";
    }
    CmdResult bad = run_cli("run " + (d / "bad.json").string());
    CHECK(bad.code == 2);
    CHECK(bad.out.find("registered") != std::string::npos);
}

TEST_CASE("cli: run + report + plot round trip") {
    fs::path d = temp_dir("swizs_cli_run");
    json cfg = {{"model", "expo_rate"}, {"theta0", {2.0}}, {"n", 15},
                {"M", 60}, {"S", 80}, {"levels", {0.5, 0.9}},
                {"methods", {"swizs"}}, {"seed", 11},
                {"output_dir", (d / "out").string()}};
    {
        std::ofstream out(d / "cfg.json");
        out << cfg.dump();
    }
    CmdResult run = run_cli("run " + (d / "cfg.json").string());
    CHECK(run.code == 0);
    REQUIRE(fs::exists(d / "out" / "manifest.json"));
    REQUIRE(fs::exists(d / "out" / "coverage.csv"));
    REQUIRE(fs::exists(d / "out" / "coverage.json"));

    // Deterministic re-run: coverage.csv byte-identical.
    std::stringstream first;
    first << std::ifstream((d / "out" / "coverage.csv")).rdbuf();
    CmdResult rerun = run_cli("run " + (d / "cfg.json").string());
    CHECK(rerun.code == 0);
    std::stringstream second;
    second << std::ifstream((d / "out" / "coverage.csv")).rdbuf();
    CHECK(first.str() == second.str());

    CmdResult rep = run_cli("report " + (d / "out").string());
    CHECK(rep.code == 0);
    CHECK(rep.out.find("expo_rate") != std::string::npos);
    CHECK(rep.out.find("theta_1") != std::string::npos);

    CmdResult plot = run_cli("plot " + (d / "out").string());
    CHECK(plot.code == 0);
    bool svg_found = false;
    for (const auto& e : fs::directory_iterator(d / "out"))
        if (e.path().extension() == ".svg") {
            svg_found = true;
            std::stringstream svg;
            svg << std::ifstream(e.path()).rdbuf();
            CHECK(svg.str().find("<svg") != std::string::npos);
            CHECK(svg.str().find("polyline") != std::string::npos);
        }
    CHECK(svg_found);

    CmdResult norep = run_cli("report " + (d / "empty").string());
    CHECK(norep.code == 3);
    CHECK(norep.out.find("no runs found") != std::string::npos);
}

TEST_CASE("cli: posterior draws from a data file respect the support") {
    fs::path d = temp_dir("swizs_cli_post");
    // unif_max data: posterior support is (max(x), inf).
    {
        std::ofstream out(d / "data.csv");
        Model m = make_model("unif_max", 25);
        Mat x0 = m.generate(Vec::Constant(1, 3.0), m.pivot(3, 0));
        out.precision(17);
        for (int i = 0; i < 25; ++i) out << x0(i, 0) << '\n';
    }
    CmdResult post = run_cli("posterior --model unif_max --data "
                             + (d / "data.csv").string() + " --S 200 -o "
                             + (d / "draws.csv").string());
    CHECK(post.code == 0);
    Mat back = read_data_csv((d / "data.csv").string());
    const double xmax = back.col(0).maxCoeff();
    std::ifstream in(d / "draws.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "s,theta_1,converged,residual");
    int rows = 0;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double theta = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(theta >= xmax);
        ++rows;
    }
    CHECK(rows == 200);

    CmdResult bad = run_cli("posterior --model bogus --data "
                            + (d / "data.csv").string());
    CHECK(bad.code == 2);
}
