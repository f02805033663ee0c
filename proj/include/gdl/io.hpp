#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gdl/criteria.hpp"
#include "gdl/graph.hpp"
#include "gdl/optimizer.hpp"

namespace gdl::io {

// Every reader throws IoError with a line number or a field path on malformed input.

// ---- graph ------------------------------------------------------------------

/// {"nodes": [id...], "edges": [[a, b]...], "ideal_lengths": [[a, b, l]...]}
/// Node order defines node indices. Ids may be strings or integers.
Graph read_graph(std::string_view text);
std::string write_graph(const Graph& g);

// ---- layout -----------------------------------------------------------------

struct LayoutMeta {
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    std::optional<WeightSchedule> schedule;
};

struct LayoutFile {
    Layout positions;
    LayoutMeta meta;
};

/// {"positions": [[x, y]...], "meta": {"seed", "iterations", "schedule"}}
LayoutFile read_layout(std::string_view text);
/// Also checks that the layout has one position per node of `g`.
LayoutFile read_layout(std::string_view text, const Graph& g);
std::string write_layout(const Layout& x, const LayoutMeta& meta = {});

// ---- weights and schedules --------------------------------------------------

/// {"ST": [[0, 1.0]], "CN": [[999, 0], [1000, 200]]}
WeightSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const WeightSchedule& s);
WeightSchedule read_schedule(std::string_view text);
std::string write_schedule(const WeightSchedule& s);

/// {"ST": 1, "CAM": 0.3}; absent criteria get weight 0.
WeightMap weights_from_json(const nlohmann::json& j);
nlohmann::json weights_to_json(const WeightMap& w);

/// "ST=1,CN=0.5". Throws InvalidArgument("no active criteria") when no weight is positive.
WeightMap parse_weights(std::string_view spec);

// ---- optimizer config -------------------------------------------------------

/// Keys: lr, iters, mode ("full"|"stochastic"), batch, seed, lr_decay, snapshot_every,
/// separator_steps, crossing_refresh, convergence_tol, convergence_window, k,
/// angular_sensitivity, target_resolution, rotations, exec ("serial"|"parallel").
/// Absent keys keep the defaults; unknown keys are rejected.
OptimizerConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const OptimizerConfig& cfg);

// ---- run trace --------------------------------------------------------------

/// {"status", "iterations", "failure"?, "entries": [{"iteration", "total", "losses": {crit: v}}]}
/// Snapshot layouts are included under "snapshots" when kept.
nlohmann::json trace_to_json(const RunResult& result);

// ---- svg --------------------------------------------------------------------

struct SvgOptions {
    bool color_by_length = true;
    double node_radius = 0.0;  ///< 0 picks 1% of the larger view extent
};

/// Colour for a relative length deviation: red at -1, blue at +1, mid-scale at 0.
std::string length_color(double relative_deviation);

std::string export_svg(const Graph& g, const Layout& x, const SvgOptions& opts = {});

// ---- quality reports --------------------------------------------------------

struct QualityReport {
    std::string graph;
    std::string source;  ///< layout provenance, e.g. "random0" or "layout.json"
    PerCriterion<double> values;
    std::optional<PerCriterion<double>> baseline;  ///< qualities the flags compare against
};

enum class Flag { improved, tie, worse };
std::string_view to_string(Flag f);

/// Ties are within 1e-9 relative (1e-12 absolute near 0).
Flag compare_quality(CriterionId c, double candidate, double baseline);

/// Header plus one row per report. Rows with a baseline also carry the baseline
/// values and one improved/tie/worse flag per criterion.
std::string write_report_csv(const std::vector<QualityReport>& rows);
nlohmann::json report_to_json(const std::vector<QualityReport>& rows);
std::string write_report_json(const std::vector<QualityReport>& rows);

// ---- files ------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gdl::io
