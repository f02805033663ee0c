#include "gdl/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "gdl/error.hpp"

namespace gdl::io {

using nlohmann::json;

namespace {

json parse(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw IoError(fmt::format("parse error at line {}: {}", line, e.what()));
    }
}

[[noreturn]] void field_error(std::string_view field, std::string_view what) {
    throw IoError(fmt::format("{}: {}", field, what));
}

const json& require(const json& j, const char* key) {
    if (!j.is_object()) field_error("<root>", "expected an object");
    auto it = j.find(key);
    if (it == j.end()) field_error(key, "missing field");
    return *it;
}

std::string node_id(const json& j, const std::string& field) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    field_error(field, "node id must be a string or an integer");
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) field_error(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) field_error(field, "expected a finite number");
    return v;
}

int lookup(const std::map<std::string, int>& index, const json& j, const std::string& field) {
    const auto id = node_id(j, field);
    auto it = index.find(id);
    if (it == index.end()) field_error(field, fmt::format("unknown node id '{}'", id));
    return it->second;
}

// Top-level keys one per line; arrays one element per line, elements compact.
std::string dump_document(const json& root) {
    std::string out = "{";
    bool first = true;
    for (const auto& [key, value] : root.items()) {
        out += first ? "\n  " : ",\n  ";
        first = false;
        out += json(key).dump() + ": ";
        if (value.is_array() && !value.empty()) {
            out += "[";
            for (std::size_t i = 0; i < value.size(); ++i) out += (i ? ",\n    " : "\n    ") + value[i].dump();
            out += "\n  ]";
        } else {
            out += value.dump();
        }
    }
    out += first ? "}\n" : "\n}\n";
    return out;
}

}  // namespace

// ---- graph ------------------------------------------------------------------

Graph read_graph(std::string_view text) {
    const json root = parse(text);
    const json& nodes = require(root, "nodes");
    const json& edges = require(root, "edges");
    if (!nodes.is_array()) field_error("nodes", "expected an array");
    if (!edges.is_array()) field_error("edges", "expected an array");

    std::vector<std::string> labels;
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string field = fmt::format("nodes[{}]", i);
        auto id = node_id(nodes[i], field);
        if (!index.emplace(id, static_cast<int>(i)).second) field_error(field, fmt::format("duplicate node id '{}'", id));
        labels.push_back(std::move(id));
    }

    std::vector<Edge> list;
    std::map<Edge, std::size_t> edge_index;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::string field = fmt::format("edges[{}]", e);
        const json& pair = edges[e];
        if (!pair.is_array() || pair.size() != 2) field_error(field, "expected [idA, idB]");
        int u = lookup(index, pair[0], field);
        int v = lookup(index, pair[1], field);
        if (u == v) field_error(field, "self-loop");
        if (u > v) std::swap(u, v);
        if (!edge_index.emplace(Edge{u, v}, list.size()).second)
            field_error(field, fmt::format("duplicate edge ({}, {})", labels[static_cast<std::size_t>(u)],
                                           labels[static_cast<std::size_t>(v)]));
        list.push_back({u, v});
    }

    std::optional<std::vector<double>> ideal;
    if (auto it = root.find("ideal_lengths"); it != root.end() && !it->is_null()) {
        if (!it->is_array()) field_error("ideal_lengths", "expected an array");
        std::vector<double> lengths(list.size(), 0.0);
        std::vector<bool> seen(list.size(), false);
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string field = fmt::format("ideal_lengths[{}]", k);
            const json& t = (*it)[k];
            if (!t.is_array() || t.size() != 3) field_error(field, "expected [idA, idB, length]");
            int u = lookup(index, t[0], field);
            int v = lookup(index, t[1], field);
            if (u > v) std::swap(u, v);
            auto e = edge_index.find(Edge{u, v});
            if (e == edge_index.end()) field_error(field, "not an edge");
            if (seen[e->second]) field_error(field, "duplicate ideal length");
            const double l = number(t[2], field);
            if (!(l > 0.0)) field_error(field, "ideal length must be positive");
            lengths[e->second] = l;
            seen[e->second] = true;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            field_error("ideal_lengths", "must give a length for every edge");
        ideal = std::move(lengths);
    }

    const int n = static_cast<int>(labels.size());
    try {
        return Graph(n, list, std::move(ideal), std::move(labels));
    } catch (const InvalidArgument& e) {
        throw IoError(e.what());
    }
}

std::string write_graph(const Graph& g) {
    json root;
    root["nodes"] = g.labels();
    json edges = json::array();
    for (const Edge& e : g.edges())
        edges.push_back({g.labels()[static_cast<std::size_t>(e.u)], g.labels()[static_cast<std::size_t>(e.v)]});
    root["edges"] = std::move(edges);
    if (g.has_ideal_lengths()) {
        json ideal = json::array();
        for (int e = 0; e < g.edge_count(); ++e) {
            const Edge& ed = g.edge(e);
            ideal.push_back({g.labels()[static_cast<std::size_t>(ed.u)], g.labels()[static_cast<std::size_t>(ed.v)],
                             g.ideal_lengths()[static_cast<std::size_t>(e)]});
        }
        root["ideal_lengths"] = std::move(ideal);
    }
    return dump_document(root);
}

// ---- schedules --------------------------------------------------------------

WeightSchedule schedule_from_json(const json& j) {
    if (!j.is_object()) field_error("schedule", "expected an object keyed by criterion");
    WeightSchedule s;
    for (const auto& [key, points] : j.items()) {
        const auto c = criterion_from_string(key);
        if (!c) field_error(key, "unknown criterion");
        if (!points.is_array()) field_error(key, "expected [[iteration, weight], ...]");
        WeightSchedule::Breakpoints bp;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::string field = fmt::format("{}[{}]", key, i);
            const json& p = points[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer())
                field_error(field, "expected [iteration, weight]");
            bp.emplace_back(p[0].get<int>(), number(p[1], field));
        }
        try {
            s.set(*c, std::move(bp));
        } catch (const InvalidArgument& e) {
            field_error(key, e.what());
        }
    }
    return s;
}

json schedule_to_json(const WeightSchedule& s) {
    json j = json::object();
    for (auto c : kAllCriteria) {
        const auto& bp = s.breakpoints(c);
        if (bp.empty()) continue;
        json points = json::array();
        for (const auto& [it, w] : bp) points.push_back({it, w});
        j[std::string(name(c))] = std::move(points);
    }
    return j;
}

WeightSchedule read_schedule(std::string_view text) { return schedule_from_json(parse(text)); }

std::string write_schedule(const WeightSchedule& s) { return dump_document(schedule_to_json(s)); }

WeightMap weights_from_json(const json& j) {
    if (!j.is_object()) field_error("weights", "expected an object keyed by criterion");
    WeightMap w;
    for (const auto& [key, value] : j.items()) {
        const auto c = criterion_from_string(key);
        if (!c) field_error(key, "unknown criterion");
        const double v = number(value, key);
        if (v < 0.0) throw InvalidArgument(fmt::format("{} weight must be >= 0", key));
        w[*c] = v;
    }
    return w;
}

json weights_to_json(const WeightMap& w) {
    json j = json::object();
    for (auto c : kAllCriteria) j[std::string(name(c))] = w[c];
    return j;
}

WeightMap parse_weights(std::string_view spec) {
    WeightMap w;
    bool any = false;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto comma = std::min(spec.find(',', pos), spec.size());
        auto item = spec.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        pos = comma + 1;
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw InvalidArgument(fmt::format("expected NAME=WEIGHT, got '{}'", item));
        const auto c = criterion_from_string(item.substr(0, eq));
        if (!c) throw InvalidArgument(fmt::format("unknown criterion '{}'", item.substr(0, eq)));
        const std::string value(item.substr(eq + 1));
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw InvalidArgument(fmt::format("bad weight '{}' for {}", value, name(*c)));
        }
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(fmt::format("{} weight must be >= 0", name(*c)));
        w[*c] = v;
        any = any || v > 0.0;
    }
    if (!any) throw InvalidArgument("no active criteria");
    return w;
}

// ---- optimizer config -------------------------------------------------------

namespace {

int integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) field_error(field, "expected an integer");
    return j.get<int>();
}

}  // namespace

OptimizerConfig config_from_json(const json& j) {
    if (!j.is_object()) field_error("config", "expected an object");
    OptimizerConfig cfg;
    for (const auto& [key, v] : j.items()) {
        if (key == "lr") cfg.lr = number(v, key);
        else if (key == "iters") cfg.iters = integer(v, key);
        else if (key == "mode") {
            const auto m = v.is_string() ? v.get<std::string>() : std::string();
            if (m == "full") cfg.mode = DescentMode::full;
            else if (m == "stochastic") cfg.mode = DescentMode::stochastic;
            else field_error(key, "expected \"full\" or \"stochastic\"");
        } else if (key == "batch") cfg.batch = integer(v, key);
        else if (key == "seed") {
            if (!v.is_number_unsigned()) field_error(key, "expected a non-negative integer");
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "lr_decay") cfg.lr_decay = number(v, key);
        else if (key == "snapshot_every") cfg.snapshot_every = integer(v, key);
        else if (key == "separator_steps") cfg.separator_steps = integer(v, key);
        else if (key == "crossing_refresh") cfg.crossing_refresh = integer(v, key);
        else if (key == "convergence_tol") cfg.convergence_tol = number(v, key);
        else if (key == "convergence_window") cfg.convergence_window = integer(v, key);
        else if (key == "k") cfg.np.k = integer(v, key);
        else if (key == "angular_sensitivity") cfg.hyper.angular_sensitivity = number(v, key);
        else if (key == "target_resolution") cfg.hyper.target_resolution = number(v, key);
        else if (key == "rotations") cfg.hyper.rotations = integer(v, key);
        else if (key == "exec") {
            const auto m = v.is_string() ? v.get<std::string>() : std::string();
            if (m == "serial") cfg.exec = Exec::serial;
            else if (m == "parallel") cfg.exec = Exec::parallel;
            else field_error(key, "expected \"serial\" or \"parallel\"");
        } else field_error(key, "unknown config key");
    }
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        field_error("config", e.what());
    }
    return cfg;
}

json config_to_json(const OptimizerConfig& cfg) {
    json j;
    j["lr"] = cfg.lr;
    j["iters"] = cfg.iters;
    j["mode"] = cfg.mode == DescentMode::full ? "full" : "stochastic";
    j["batch"] = cfg.batch;
    j["seed"] = cfg.seed;
    j["lr_decay"] = cfg.lr_decay;
    j["snapshot_every"] = cfg.snapshot_every;
    j["separator_steps"] = cfg.separator_steps;
    if (cfg.crossing_refresh) j["crossing_refresh"] = *cfg.crossing_refresh;
    j["convergence_tol"] = cfg.convergence_tol;
    j["convergence_window"] = cfg.convergence_window;
    if (cfg.np.k) j["k"] = *cfg.np.k;
    j["angular_sensitivity"] = cfg.hyper.angular_sensitivity;
    if (cfg.hyper.target_resolution) j["target_resolution"] = *cfg.hyper.target_resolution;
    j["rotations"] = cfg.hyper.rotations;
    j["exec"] = cfg.exec == Exec::serial ? "serial" : "parallel";
    return j;
}

// ---- run trace --------------------------------------------------------------

json trace_to_json(const RunResult& result) {
    json j;
    j["status"] = to_string(result.status);
    j["iterations"] = result.iterations;
    if (!result.failure.empty()) j["failure"] = result.failure;
    json entries = json::array();
    for (const auto& e : result.trace.entries) {
        json row;
        row["iteration"] = e.iteration;
        row["total"] = e.total;
        json losses = json::object();
        for (auto c : kAllCriteria)
            if (e.active[c]) losses[std::string(name(c))] = e.losses[c];
        row["losses"] = std::move(losses);
        if (e.snapshot) row["snapshot"] = *e.snapshot;
        entries.push_back(std::move(row));
    }
    j["entries"] = std::move(entries);
    if (!result.trace.snapshots.empty()) {
        json snaps = json::array();
        for (const auto& x : result.trace.snapshots) {
            json pos = json::array();
            for (const Vec2& p : x) pos.push_back({p.x, p.y});
            snaps.push_back(std::move(pos));
        }
        j["snapshots"] = std::move(snaps);
    }
    return j;
}

// ---- layout -----------------------------------------------------------------

LayoutFile read_layout(std::string_view text) {
    const json root = parse(text);
    const json& positions = require(root, "positions");
    if (!positions.is_array()) field_error("positions", "expected an array");
    LayoutFile out;
    out.positions.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const std::string field = fmt::format("positions[{}]", i);
        const json& p = positions[i];
        if (!p.is_array() || p.size() != 2) field_error(field, "expected [x, y]");
        out.positions.push_back({number(p[0], field), number(p[1], field)});
    }
    if (auto it = root.find("meta"); it != root.end() && !it->is_null()) {
        const json& meta = *it;
        if (!meta.is_object()) field_error("meta", "expected an object");
        if (auto s = meta.find("seed"); s != meta.end()) {
            if (!s->is_number_unsigned()) field_error("meta.seed", "expected a non-negative integer");
            out.meta.seed = s->get<std::uint64_t>();
        }
        if (auto s = meta.find("iterations"); s != meta.end()) {
            if (!s->is_number_integer()) field_error("meta.iterations", "expected an integer");
            out.meta.iterations = s->get<int>();
        }
        if (auto s = meta.find("schedule"); s != meta.end()) out.meta.schedule = schedule_from_json(*s);
    }
    return out;
}

LayoutFile read_layout(std::string_view text, const Graph& g) {
    auto out = read_layout(text);
    if (out.positions.size() != static_cast<std::size_t>(g.node_count()))
        throw IoError(fmt::format("layout has {} positions but the graph has {} nodes", out.positions.size(),
                                  g.node_count()));
    return out;
}

std::string write_layout(const Layout& x, const LayoutMeta& meta) {
    json root;
    json positions = json::array();
    for (const Vec2& p : x) positions.push_back({p.x, p.y});
    root["positions"] = std::move(positions);
    if (meta.seed || meta.iterations || meta.schedule) {
        json m = json::object();
        if (meta.seed) m["seed"] = *meta.seed;
        if (meta.iterations) m["iterations"] = *meta.iterations;
        if (meta.schedule) m["schedule"] = schedule_to_json(*meta.schedule);
        root["meta"] = std::move(m);
    }
    return dump_document(root);
}

// ---- svg --------------------------------------------------------------------

std::string length_color(double relative_deviation) {
    const double r = std::clamp(relative_deviation, -1.0, 1.0);
    const double t = 0.5 * (r + 1.0);
    const int red = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    const int blue = static_cast<int>(std::lround(255.0 * t));
    return fmt::format("#{:02x}00{:02x}", red, blue);
}

std::string export_svg(const Graph& g, const Layout& x, const SvgOptions& opts) {
    validate_layout(g, x);
    double minx = 0.0, maxx = 0.0, miny = 0.0, maxy = 0.0;
    if (!x.empty()) {
        minx = maxx = x[0].x;
        miny = maxy = x[0].y;
        for (const Vec2& p : x) {
            minx = std::min(minx, p.x);
            maxx = std::max(maxx, p.x);
            miny = std::min(miny, p.y);
            maxy = std::max(maxy, p.y);
        }
    }
    double extent = std::max(maxx - minx, maxy - miny);
    if (extent <= 0.0) extent = 1.0;
    const double margin = 0.05 * extent;
    const double radius = opts.node_radius > 0.0 ? opts.node_radius : 0.01 * extent;

    double avg = 0.0;
    for (const Edge& e : g.edges()) avg += norm(x[static_cast<std::size_t>(e.u)] - x[static_cast<std::size_t>(e.v)]);
    if (g.edge_count() > 0) avg /= g.edge_count();

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n", minx - margin,
                       miny - margin, (maxx - minx) + 2.0 * margin, (maxy - miny) + 2.0 * margin);
    out += fmt::format("<g stroke-width=\"{}\" stroke-linecap=\"round\">\n", 0.4 * radius);
    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        const Vec2 a = x[static_cast<std::size_t>(ed.u)];
        const Vec2 b = x[static_cast<std::size_t>(ed.v)];
        std::string color = "#555555";
        if (opts.color_by_length) {
            const double ideal = g.has_ideal_lengths() ? g.ideal_lengths()[static_cast<std::size_t>(e)] : avg;
            color = ideal > 0.0 ? length_color((norm(a - b) - ideal) / ideal) : length_color(0.0);
        }
        out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>\n", a.x, a.y, b.x, b.y, color);
    }
    out += "</g>\n<g fill=\"#222222\">\n";
    for (const Vec2& p : x) out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n", p.x, p.y, radius);
    out += "</g>\n</svg>\n";
    return out;
}

// ---- reports ----------------------------------------------------------------

std::string_view to_string(Flag f) {
    switch (f) {
        case Flag::improved: return "improved";
        case Flag::tie: return "tie";
        case Flag::worse: return "worse";
    }
    return "unknown";
}

Flag compare_quality(CriterionId c, double candidate, double baseline) {
    const double tol = std::max(1e-12, 1e-9 * std::max(std::abs(candidate), std::abs(baseline)));
    if (std::abs(candidate - baseline) <= tol) return Flag::tie;
    const bool better = higher_is_better(c) ? candidate > baseline : candidate < baseline;
    return better ? Flag::improved : Flag::worse;
}

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string write_report_csv(const std::vector<QualityReport>& rows) {
    std::string out = "graph,source";
    for (auto c : kAllCriteria) out += fmt::format(",{}", name(c));
    for (auto c : kAllCriteria) out += fmt::format(",{}_base", name(c));
    for (auto c : kAllCriteria) out += fmt::format(",{}_flag", name(c));
    out += "\n";
    for (const auto& row : rows) {
        out += csv_field(row.graph) + "," + csv_field(row.source);
        for (auto c : kAllCriteria) out += fmt::format(",{}", row.values[c]);
        for (auto c : kAllCriteria) out += row.baseline ? fmt::format(",{}", (*row.baseline)[c]) : std::string(",");
        for (auto c : kAllCriteria) {
            out += ",";
            if (row.baseline) out += to_string(compare_quality(c, row.values[c], (*row.baseline)[c]));
        }
        out += "\n";
    }
    return out;
}

json report_to_json(const std::vector<QualityReport>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        json j;
        j["graph"] = row.graph;
        j["source"] = row.source;
        json values = json::object();
        for (auto c : kAllCriteria) values[std::string(name(c))] = row.values[c];
        j["quality"] = std::move(values);
        if (row.baseline) {
            json base = json::object();
            json flags = json::object();
            for (auto c : kAllCriteria) {
                base[std::string(name(c))] = (*row.baseline)[c];
                flags[std::string(name(c))] = to_string(compare_quality(c, row.values[c], (*row.baseline)[c]));
            }
            j["baseline"] = std::move(base);
            j["flags"] = std::move(flags);
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::string write_report_json(const std::vector<QualityReport>& rows) { return report_to_json(rows).dump(2) + "\n"; }

// ---- files ------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

}  // namespace gdl::io
