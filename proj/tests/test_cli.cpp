#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "gdl/cli.hpp"
#include "gdl/io.hpp"
#include "oracles.hpp"

using namespace gdl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "gdl");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string polygon_layout(int n) {
    Layout x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x[static_cast<std::size_t>(i)] = {std::cos(2 * std::numbers::pi * i / n), std::sin(2 * std::numbers::pi * i / n)};
    return io::write_layout(x);
}

}  // namespace

TEST_CASE("generate writes graph files") {
    auto r = cli_run({"generate", "--family", "cycle", "--n", "10"});
    CHECK(r.code == 0);
    auto g = io::read_graph(r.out);
    CHECK(g.node_count() == 10);
    CHECK(g.edge_count() == 10);

    r = cli_run({"generate", "--family", "grid", "--w", "4", "--h", "5"});
    REQUIRE(r.code == 0);
    g = io::read_graph(r.out);
    CHECK(g.node_count() == 20);
    CHECK(g.edge_count() == 31);

    r = cli_run({"generate", "--family", "grid", "--params", R"({"w": 4, "h": 5})"});
    REQUIRE(r.code == 0);
    CHECK(io::read_graph(r.out) == g);

    r = cli_run({"generate", "--family", "moebius", "--n", "5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown family") != std::string::npos);

    CHECK(cli_run({"generate"}).code == 2);
    CHECK(cli_run({"generate", "--family", "cycle", "--bogus", "1"}).code == 2);
    CHECK(cli_run({}).code == 2);
}

TEST_CASE("layout runs the optimizer and writes outputs") {
    TempDir dir("gdl_test_cli_layout");
    REQUIRE(cli_run({"generate", "--family", "cycle", "--n", "10", "--out", dir / "c10.json"}).code == 0);
    const auto r = cli_run({"layout", "--graph", dir / "c10.json", "--seed", "0", "--weights", "ST=1", "--out",
                            dir / "x.json", "--svg", dir / "x.svg", "--trace", dir / "t.json", "--snapshot-every", "1"});
    REQUIRE(r.code == 0);
    const auto f = io::read_layout(io::read_file(dir / "x.json"));
    CHECK(f.positions.size() == 10);
    CHECK(f.meta.seed == 0u);
    CHECK(fs::exists(dir / "x.svg"));
    const auto trace = nlohmann::json::parse(io::read_file(dir / "t.json"));
    const auto& entries = trace["entries"];
    REQUIRE(entries.size() > 100);
    bool monotone = true;
    for (std::size_t i = 101; i < entries.size(); ++i)
        if (entries[i]["total"].get<double>() > entries[i - 1]["total"].get<double>()) monotone = false;
    CHECK(monotone);
}

TEST_CASE("layout argument errors") {
    TempDir dir("gdl_test_cli_errors");
    REQUIRE(cli_run({"generate", "--family", "path", "--n", "3", "--out", dir / "p.json"}).code == 0);
    auto r = cli_run({"layout", "--graph", dir / "p.json", "--weights", ""});
    CHECK(r.code == 2);
    CHECK(r.err.find("no active criteria") != std::string::npos);
    r = cli_run({"layout", "--graph", dir / "p.json"});
    CHECK(r.code == 2);
    r = cli_run({"layout", "--graph", dir / "missing.json", "--weights", "ST=1"});
    CHECK(r.code == 2);

    io::write_file(dir / "broken.json", "{\"nodes\": [1, 2],\n \"edges\": [[1, 2]");
    r = cli_run({"layout", "--graph", dir / "broken.json", "--weights", "ST=1"});
    CHECK(r.code == 4);
    CHECK(r.err.find("line") != std::string::npos);

    r = cli_run({"layout", "--graph", dir / "p.json", "--weights", "ST=1", "--lr", "1e6", "--lr-decay", "1"});
    CHECK(r.code == 3);
}

TEST_CASE("layout is byte-identical per seed") {
    TempDir dir("gdl_test_cli_det");
    REQUIRE(cli_run({"generate", "--family", "grid", "--w", "4", "--h", "4", "--out", dir / "g.json"}).code == 0);
    io::write_file(dir / "s.json", R"({"ST": [[0, 1]], "CN": [[199, 0], [200, 50]]})");
    for (const char* mode : {"full", "stochastic"}) {
        const std::vector<std::string> args{"layout", "--graph", dir / "g.json", "--seed", "4", "--schedule",
                                            dir / "s.json", "--iters", "400", "--mode", mode};
        const auto a = cli_run(args);
        const auto b = cli_run(args);
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
        auto serial = args;
        serial.push_back("--serial");
        CHECK(cli_run(serial).out == a.out);
    }
}

TEST_CASE("eval reports the nine qualities") {
    TempDir dir("gdl_test_cli_eval");
    REQUIRE(cli_run({"generate", "--family", "cycle", "--n", "10", "--out", dir / "c10.json"}).code == 0);
    io::write_file(dir / "poly.json", polygon_layout(10));
    auto r = cli_run({"eval", "--graph", dir / "c10.json", "--layout", dir / "poly.json"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out)[0];
    CHECK(j["graph"] == "c10");
    CHECK(j["source"] == "poly");
    CHECK(j["quality"]["CN"] == 0.0);
    CHECK(j["quality"]["AR"].get<double>() >= 0.9);
    CHECK(j["quality"]["AR"].get<double>() <= 1.0);
    CHECK(j["quality"]["NP"].get<double>() == doctest::Approx(1.0));

    REQUIRE(cli_run({"generate", "--family", "grid", "--w", "5", "--h", "5", "--out", dir / "g.json"}).code == 0);
    const auto x = random_layout(25, 0);
    io::write_file(dir / "r.json", io::write_layout(x));
    r = cli_run({"eval", "--graph", dir / "g.json", "--layout", dir / "r.json", "--out", dir / "q.csv"});
    REQUIRE(r.code == 0);
    const auto csv = io::read_file(dir / "q.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    r = cli_run({"eval", "--graph", dir / "g.json", "--layout", dir / "r.json"});
    j = nlohmann::json::parse(r.out)[0];
    CHECK(j["quality"]["CN"].get<double>() ==
          static_cast<double>(oracle::brute_crossings(io::read_graph(io::read_file(dir / "g.json")), x).size()));

    REQUIRE(cli_run({"generate", "--family", "path", "--n", "3", "--out", dir / "p.json"}).code == 0);
    io::write_file(dir / "coincident.json", io::write_layout({{0, 0}, {0, 0}, {1, 0}}));
    r = cli_run({"eval", "--graph", dir / "p.json", "--layout", dir / "coincident.json"});
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out)[0];
    CHECK(j["quality"]["VR"] == 0.0);

    io::write_file(dir / "short.json", io::write_layout({{0, 0}}));
    CHECK(cli_run({"eval", "--graph", dir / "p.json", "--layout", dir / "short.json"}).code == 4);
}

TEST_CASE("compare batches layouts with improvement flags") {
    TempDir dir("gdl_test_cli_compare");
    fs::create_directories(dir.path / "graphs");
    fs::create_directories(dir.path / "inits");
    fs::create_directories(dir.path / "empty");

    auto r = cli_run({"compare", "--graphs", dir / "empty", "--weights", "ST=1"});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);

    REQUIRE(cli_run({"generate", "--family", "cycle", "--n", "8", "--out", dir / "graphs/c8.json"}).code == 0);
    REQUIRE(cli_run({"generate", "--family", "path", "--n", "5", "--out", dir / "graphs/p5.json"}).code == 0);
    for (int s = 0; s < 3; ++s) {
        io::write_file(dir / ("inits/c8.s" + std::to_string(s) + ".json"), io::write_layout(random_layout(8, 10 + s)));
        io::write_file(dir / ("inits/p5.s" + std::to_string(s) + ".json"), io::write_layout(random_layout(5, 20 + s)));
    }
    r = cli_run({"compare", "--graphs", dir / "graphs", "--inits", dir / "inits", "--weights", "ST=1", "--iters",
                 "300", "--out", dir / "report.csv"});
    REQUIRE(r.code == 0);
    const auto csv = io::read_file(dir / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
    CHECK(csv.find("\nc8,s0,") != std::string::npos);
    CHECK(csv.find("\np5,s2,") != std::string::npos);

    r = cli_run({"compare", "--graphs", dir / "graphs", "--random-inits", "2", "--weights", "ST=1", "--iters", "300",
                 "--out", dir / "report.json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(io::read_file(dir / "report.json"));
    REQUIRE(j.size() == 4);
    for (const auto& row : j) CHECK(row["flags"]["ST"] == "improved");

    CHECK(cli_run({"compare", "--graphs", dir / "graphs", "--single", "--weights", "ST=1"}).code == 2);
}

TEST_CASE("the installed binary reports exit codes") {
    TempDir dir("gdl_test_cli_binary");
    const std::string bin = GDL_CLI_PATH;
    const auto quiet = " >" + (dir / "out.txt") + " 2>" + (dir / "err.txt");
    auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
    CHECK(status(std::system((bin + " generate --family cycle --n 5" + quiet).c_str())) == 0);
    CHECK(io::read_graph(io::read_file(dir / "out.txt")).node_count() == 5);
    CHECK(status(std::system((bin + " generate --family nope" + quiet).c_str())) == 2);
    CHECK(status(std::system((bin + " --help" + quiet).c_str())) == 0);
}
