#include "gdl/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <omp.h>

#include "gdl/error.hpp"
#include "gdl/http_service.hpp"
#include "gdl/session.hpp"

namespace gdl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

io::QualityReport evaluate_layout(const Graph& g, const DistanceMatrix& d, const Layout& x, std::string graph,
                                  std::string source, const NpConfig& np, const Hyper& hyper) {
    io::QualityReport r;
    r.graph = std::move(graph);
    r.source = std::move(source);
    r.values = quality_all(g, d, x, np, hyper);
    return r;
}

namespace {

struct Cell {
    std::string graph_name;
    const Graph* graph;
    const DistanceMatrix* dist;
    std::string init_name;
    Layout init;
};

Layout final_layout(const Graph& g, const DistanceMatrix& d, const Layout& init, const WeightSchedule& s,
                    const OptimizerConfig& cfg) {
    return run(g, d, init, s, cfg).layout;
}

std::vector<fs::path> json_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<io::QualityReport> compare(const CompareOptions& opts) {
    if (!opts.single && !opts.schedule) throw InvalidArgument("compare needs a schedule or single-criterion mode");
    if (opts.random_inits < 0) throw InvalidArgument("random init count must be >= 0");

    std::vector<std::string> names;
    std::map<std::string, Graph> graphs;
    std::map<std::string, DistanceMatrix> dists;
    for (const auto& path : json_files(opts.graphs)) {
        const auto stem = path.stem().string();
        Graph g = io::read_graph(io::read_file(path));
        dists.emplace(stem, shortest_paths(g));
        graphs.emplace(stem, std::move(g));
        names.push_back(stem);
    }

    std::vector<Cell> cells;
    for (const auto& gname : names) {
        const Graph& g = graphs.at(gname);
        if (opts.inits) {
            for (const auto& path : json_files(*opts.inits)) {
                const auto file = path.filename().string();
                const auto prefix = gname + ".";
                if (file.rfind(prefix, 0) != 0) continue;
                auto init_name = file.substr(prefix.size(), file.size() - prefix.size() - 5);
                if (init_name.empty() || init_name.find('.') != std::string::npos) continue;
                cells.push_back({gname, &g, &dists.at(gname), std::move(init_name),
                                 io::read_layout(io::read_file(path), g).positions});
            }
        } else {
            for (int seed = 0; seed < opts.random_inits; ++seed)
                cells.push_back({gname, &g, &dists.at(gname), fmt::format("random{}", seed),
                                 random_layout(g.node_count(), static_cast<std::uint64_t>(seed))});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::tie(a.graph_name, a.init_name) < std::tie(b.graph_name, b.init_name);
    });

    // Cells run concurrently, so each run uses the serial kernels.
    OptimizerConfig cfg = opts.cfg;
    cfg.exec = Exec::serial;
    std::vector<io::QualityReport> rows(cells.size());
    std::vector<std::string> errors(cells.size());
    const int jobs = opts.jobs > 0 ? opts.jobs : omp_get_max_threads();
    const int count = static_cast<int>(cells.size());

#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int i = 0; i < count; ++i) {
        const Cell& cell = cells[static_cast<std::size_t>(i)];
        const auto ii = static_cast<std::size_t>(i);
        try {
            const auto& g = *cell.graph;
            const auto& d = *cell.dist;
            const auto base = quality_all(g, d, cell.init, cfg.np, cfg.hyper);
            io::QualityReport row;
            row.graph = cell.graph_name;
            row.baseline = base;
            if (opts.single) {
                row.source = cell.init_name + ".single";
                for (auto c : kAllCriteria) {
                    WeightMap w;
                    w[c] = 1.0;
                    const Layout x = final_layout(g, d, cell.init, WeightSchedule::constant(w), cfg);
                    row.values[c] = quality(c, g, d, x, cfg.np, cfg.hyper);
                }
            } else {
                row.source = cell.init_name;
                const Layout x = final_layout(g, d, cell.init, *opts.schedule, cfg);
                row.values = quality_all(g, d, x, cfg.np, cfg.hyper);
            }
            rows[ii] = std::move(row);
        } catch (const std::exception& e) {
            errors[ii] = fmt::format("{}/{}: {}", cell.graph_name, cell.init_name, e.what());
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);
    return rows;
}

namespace {

std::atomic<service::HttpService*> g_service{nullptr};

extern "C" void handle_stop(int) {
    if (auto* s = g_service.load()) s->stop();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else io::write_file(path, text);
}

bool wants_json(const std::string& path) { return fs::path(path).extension() == ".json"; }

struct LayoutArgs {
    std::string graph, init = "random", weights, schedule, out, svg, trace, mode = "full";
    bool weights_given = false;
    std::uint64_t seed = 0;
    int iters = 2000, batch = 64, k = 0, snapshot_every = 10;
    double lr = 0.05, lr_decay = 0.999;
    bool serial = false, keep_snapshots = false;
};

OptimizerConfig config_of(const LayoutArgs& a) {
    OptimizerConfig cfg;
    cfg.lr = a.lr;
    cfg.iters = a.iters;
    cfg.lr_decay = a.lr_decay;
    cfg.seed = a.seed;
    cfg.batch = a.batch;
    cfg.snapshot_every = a.snapshot_every;
    cfg.keep_snapshots = a.keep_snapshots;
    cfg.mode = a.mode == "stochastic" ? DescentMode::stochastic : DescentMode::full;
    if (a.k > 0) cfg.np.k = a.k;
    cfg.exec = a.serial ? Exec::serial : Exec::parallel;
    cfg.validate();
    return cfg;
}

void add_run_flags(CLI::App* cmd, LayoutArgs& a) {
    cmd->add_option("--seed", a.seed, "RNG seed for the random init and stochastic sampling");
    cmd->add_option("--weights", a.weights, "Constant weights, e.g. \"ST=1,CN=0.5\"");
    cmd->add_option("--schedule", a.schedule, "Weight schedule JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--iters", a.iters, "Maximum iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", a.lr, "Learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--lr-decay", a.lr_decay, "Multiplicative learning-rate decay per iteration");
    cmd->add_option("--mode", a.mode, "full or stochastic")->check(CLI::IsMember({"full", "stochastic"}));
    cmd->add_option("--batch", a.batch, "Sampled terms per criterion in stochastic mode")->check(CLI::PositiveNumber);
    cmd->add_option("--k", a.k, "Neighbourhood size for NP (default: node degree)");
    cmd->add_flag("--serial", a.serial, "Use the serial reference kernels");
}

WeightSchedule schedule_of(const LayoutArgs& a) {
    if (!a.schedule.empty() && a.weights_given) throw InvalidArgument("give --weights or --schedule, not both");
    if (!a.schedule.empty()) return io::read_schedule(io::read_file(a.schedule));
    if (a.weights_given) return WeightSchedule::constant(io::parse_weights(a.weights));
    throw InvalidArgument("--weights or --schedule is required");
}

int cmd_generate(const std::string& family_name, const std::string& params_json, FamilyParams p,
                 const std::string& out_path, std::ostream& out) {
    const auto family = family_from_string(family_name);
    if (!family) throw InvalidArgument(fmt::format("unknown family '{}'", family_name));
    if (!params_json.empty()) {
        json j;
        try {
            j = json::parse(params_json);
        } catch (const json::parse_error& e) {
            throw InvalidArgument(fmt::format("--params: {}", e.what()));
        }
        if (!j.is_object()) throw InvalidArgument("--params must be a JSON object");
        for (const auto& [key, v] : j.items()) {
            if (!v.is_number_integer()) throw InvalidArgument(fmt::format("--params: {} must be an integer", key));
            const int value = v.get<int>();
            if (key == "n") p.n = value;
            else if (key == "w") p.w = value;
            else if (key == "h") p.h = value;
            else if (key == "branch") p.branch = value;
            else if (key == "depth") p.depth = value;
            else if (key == "a") p.a = value;
            else if (key == "b") p.b = value;
            else throw InvalidArgument(fmt::format("--params: unknown key '{}'", key));
        }
    }
    write_output(out_path, io::write_graph(generate(*family, p)), out);
    return kOk;
}

int cmd_layout(const LayoutArgs& a, std::ostream& out, std::ostream& err) {
    const Graph g = io::read_graph(io::read_file(a.graph));
    const auto schedule = schedule_of(a);
    const auto cfg = config_of(a);
    const Layout init = a.init == "random" ? random_layout(g.node_count(), a.seed)
                                           : io::read_layout(io::read_file(a.init), g).positions;
    const auto result = run(g, init, schedule, cfg);
    if (!a.trace.empty()) io::write_file(a.trace, io::trace_to_json(result).dump(2) + "\n");
    if (result.status == RunStatus::diverged) {
        err << "error: " << result.failure << "\n";
        return kNumerical;
    }
    io::LayoutMeta meta;
    meta.seed = a.seed;
    meta.iterations = result.iterations;
    meta.schedule = schedule;
    write_output(a.out, io::write_layout(result.layout, meta), out);
    if (!a.svg.empty()) io::write_file(a.svg, io::export_svg(g, result.layout));
    return kOk;
}

int cmd_eval(const std::string& graph_path, const std::string& layout_path, const std::string& out_path, int k,
             std::ostream& out) {
    const Graph g = io::read_graph(io::read_file(graph_path));
    const Layout x = io::read_layout(io::read_file(layout_path), g).positions;
    const auto d = shortest_paths(g);
    NpConfig np;
    if (k > 0) np.k = k;
    const auto row = evaluate_layout(g, d, x, fs::path(graph_path).stem().string(),
                                     fs::path(layout_path).stem().string(), np);
    const bool csv = !out_path.empty() && fs::path(out_path).extension() == ".csv";
    write_output(out_path, csv ? io::write_report_csv({row}) : io::write_report_json({row}), out);
    return kOk;
}

int cmd_serve(const std::string& host, int port, std::ostream& out) {
    service::SessionManager sessions;
    service::HttpService http(sessions);
    const int bound = port == 0 ? http.bind_any_port(host) : port;
    if (bound < 0) throw IoError(fmt::format("cannot bind {}", host));
    out << fmt::format("listening on http://{}:{}\n", host, bound) << std::flush;
    g_service = &http;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    const bool ok = port == 0 ? http.serve() : http.listen(host, port);
    g_service = nullptr;
    if (!ok) throw IoError(fmt::format("cannot listen on {}:{}", host, port));
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-criteria graph layout by gradient descent"};
    app.require_subcommand(1);

    std::string family, params, gen_out;
    FamilyParams fp;
    auto* gen = app.add_subcommand("generate", "Write a generated graph");
    gen->set_help_flag("--help", "Print this help message and exit");
    gen->add_option("--family", family, "cycle, path, grid, tree, complete, bipartite, cube, dodecahedron")->required();
    gen->add_option("--params", params, "JSON object of size parameters");
    gen->add_option("--n", fp.n);
    gen->add_option("--w", fp.w);
    gen->add_option("--h", fp.h);
    gen->add_option("--branch", fp.branch);
    gen->add_option("--depth", fp.depth);
    gen->add_option("--a", fp.a);
    gen->add_option("--b", fp.b);
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    LayoutArgs la;
    auto* lay = app.add_subcommand("layout", "Optimize a layout");
    lay->add_option("--graph", la.graph, "Graph JSON file")->required()->check(CLI::ExistingFile);
    lay->add_option("--init", la.init, "\"random\" or a layout JSON file");
    add_run_flags(lay, la);
    lay->add_option("--out", la.out, "Layout output file (default stdout)");
    lay->add_option("--svg", la.svg, "Also write an SVG drawing");
    lay->add_option("--trace", la.trace, "Also write the loss trace as JSON");
    lay->add_option("--snapshot-every", la.snapshot_every, "Trace cadence")->check(CLI::PositiveNumber);
    lay->add_flag("--keep-snapshots", la.keep_snapshots, "Store layouts in the trace");

    std::string eval_graph, eval_layout, eval_out;
    int eval_k = 0;
    auto* ev = app.add_subcommand("eval", "Compute the nine quality measures");
    ev->add_option("--graph", eval_graph)->required()->check(CLI::ExistingFile);
    ev->add_option("--layout", eval_layout)->required()->check(CLI::ExistingFile);
    ev->add_option("--out", eval_out, "Report file, .csv or .json (default JSON on stdout)");
    ev->add_option("--k", eval_k, "Neighbourhood size for NP (default: node degree)");

    LayoutArgs ca;
    ca.iters = 2000;
    std::string cmp_graphs, cmp_inits, cmp_out;
    int random_inits = 1, jobs = 0;
    bool single = false;
    auto* cmp = app.add_subcommand("compare", "Batch layout and evaluation with improvement flags");
    cmp->add_option("--graphs", cmp_graphs, "Directory of graph JSON files")->required();
    cmp->add_option("--inits", cmp_inits, "Directory of <graph>.<init>.json layouts");
    cmp->add_option("--random-inits", random_inits, "Random inits per graph when --inits is absent");
    add_run_flags(cmp, ca);
    cmp->add_flag("--single", single, "One single-criterion run per column");
    cmp->add_option("--jobs", jobs, "Concurrent cells (default: all cores)");
    cmp->add_option("--out", cmp_out, "Report file, .csv or .json (default CSV on stdout)");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* srv = app.add_subcommand("serve", "Run the interactive session service");
    srv->add_option("--host", host);
    srv->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535));

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) err << sub->help();
        return kUsage;
    }
    la.weights_given = lay->count("--weights") > 0;
    ca.weights_given = cmp->count("--weights") > 0;

    try {
        if (*gen) return cmd_generate(family, params, fp, gen_out, out);
        if (*lay) return cmd_layout(la, out, err);
        if (*ev) return cmd_eval(eval_graph, eval_layout, eval_out, eval_k, out);
        if (*cmp) {
            CompareOptions opts;
            opts.graphs = cmp_graphs;
            if (!cmp_inits.empty()) opts.inits = cmp_inits;
            opts.random_inits = random_inits;
            opts.single = single;
            if (!single) opts.schedule = schedule_of(ca);
            else if (ca.weights_given || !ca.schedule.empty())
                throw InvalidArgument("--single takes no --weights or --schedule");
            opts.cfg = config_of(ca);
            opts.jobs = jobs;
            const auto rows = compare(opts);
            write_output(cmp_out, wants_json(cmp_out) ? io::write_report_json(rows) : io::write_report_csv(rows), out);
            return kOk;
        }
        if (*srv) return cmd_serve(host, port, out);
    } catch (const NumericalDivergence& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}

}  // namespace gdl::cli
