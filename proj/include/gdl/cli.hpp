#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gdl/io.hpp"
#include "gdl/optimizer.hpp"

namespace gdl::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

/// Full command line including the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Nine qualities of one layout.
io::QualityReport evaluate_layout(const Graph& g, const DistanceMatrix& d, const Layout& x, std::string graph,
                                  std::string source, const NpConfig& np = {}, const Hyper& hyper = {});

struct CompareOptions {
    std::filesystem::path graphs;                ///< *.json graph files
    std::optional<std::filesystem::path> inits;  ///< files named <graph stem>.<init name>.json
    int random_inits = 1;                        ///< seeds 0..k-1 when `inits` is absent
    std::optional<WeightSchedule> schedule;      ///< one run per cell with this schedule
    bool single = false;                         ///< one run per criterion, column c from run {c: 1}
    OptimizerConfig cfg;
    int jobs = 0;                                ///< 0 = OpenMP default
};

/// One row per (graph, init) sorted by graph then init name; baseline = the initial layout.
std::vector<io::QualityReport> compare(const CompareOptions& opts);

}  // namespace gdl::cli
