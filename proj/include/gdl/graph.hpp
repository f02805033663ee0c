#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gdl {

/// Undirected edge stored with u < v.
struct Edge {
    int u = 0;
    int v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph on nodes 0..n-1. Immutable once built.
///
/// Edges keep their insertion order; that order defines edge indices used by
/// crossing pairs and separator keys. Ideal edge lengths, when present, are
/// aligned with the edge list.
class Graph {
public:
    Graph() = default;

    /// Throws InvalidArgument on self-loops, duplicates or out-of-range endpoints.
    Graph(int n, const std::vector<Edge>& edges,
          std::optional<std::vector<double>> ideal_lengths = std::nullopt,
          std::vector<std::string> labels = {});

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

    bool adjacent(int i, int j) const {
        return adj_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                    static_cast<std::size_t>(j)] != 0;
    }
    const std::vector<int>& neighbors(int i) const { return nbrs_[static_cast<std::size_t>(i)]; }
    int degree(int i) const { return static_cast<int>(nbrs_[static_cast<std::size_t>(i)].size()); }
    int max_degree() const;

    bool has_ideal_lengths() const { return ideal_.has_value(); }
    const std::vector<double>& ideal_lengths() const { return *ideal_; }

    /// External ids; defaults to "0".."n-1".
    const std::vector<std::string>& labels() const { return labels_; }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_ && a.ideal_ == b.ideal_;
    }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::uint8_t> adj_;
    std::vector<std::vector<int>> nbrs_;
    std::optional<std::vector<double>> ideal_;
    std::vector<std::string> labels_;
};

/// All-pairs hop distances, row-major n x n.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double operator()(int i, int j) const { return d_[index(i, j)]; }
    double& operator()(int i, int j) { return d_[index(i, j)]; }
    double max() const;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }
    int n_ = 0;
    std::vector<double> d_;
};

/// BFS from every node. Throws DisconnectedGraph when some pair is unreachable.
DistanceMatrix shortest_paths(const Graph& g);

bool is_connected(const Graph& g);

enum class Family { cycle, path, grid, balanced_tree, complete, complete_bipartite, cube, dodecahedron };

struct FamilyParams {
    int n = 0;       // cycle, path, complete
    int w = 0;       // grid
    int h = 0;
    int branch = 0;  // balanced_tree
    int depth = 0;
    int a = 0;       // complete_bipartite
    int b = 0;
};

/// Canonical member of a family with deterministic numbering.
Graph generate(Family family, const FamilyParams& params);

std::optional<Family> family_from_string(std::string_view name);
std::string_view to_string(Family family);

/// Short name like "cycle10" or "grid5x5" used for reports and file stems.
std::string family_graph_name(Family family, const FamilyParams& params);

}  // namespace gdl
