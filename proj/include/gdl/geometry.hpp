#pragma once

#include <utility>
#include <vector>

#include "gdl/exec.hpp"
#include "gdl/graph.hpp"
#include "gdl/vec2.hpp"

namespace gdl {

/// Sign tolerance of the orientation predicate.
inline constexpr double kOrientationTolerance = 1e-12;

/// Two edges with four distinct endpoints whose segments cross.
/// Edge indices satisfy first < second.
struct CrossingPair {
    int first = 0;
    int second = 0;
    friend bool operator==(const CrossingPair&, const CrossingPair&) = default;
    friend auto operator<=>(const CrossingPair&, const CrossingPair&) = default;
};

/// Throws InvalidArgument when the layout does not match the graph or holds non-finite values.
void validate_layout(const Graph& g, const Layout& layout);

/// Sign of the turn p -> q -> r: +1 left, -1 right, 0 within tolerance.
int orientation(Vec2 p, Vec2 q, Vec2 r);

/// Proper intersection of segments ab and cd. Collinear overlap of positive length counts;
/// touching at an endpoint does not.
bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// All crossing edge pairs sorted by (first, second). Pairs sharing a node are never reported.
std::vector<CrossingPair> detect_crossings(const Graph& g, const Layout& layout, Exec exec = Exec::parallel);

/// Acute angle in [0, pi/2] between the two edges' direction vectors.
/// Throws DegenerateLayout on a zero-length edge.
double crossing_angle(const Graph& g, const CrossingPair& pair, const Layout& layout);

struct IncidentAngle {
    int i = 0;  ///< first outer endpoint
    int j = 0;  ///< shared node
    int k = 0;  ///< second outer endpoint, i < k
    double angle = 0.0;  ///< in [0, pi]
};

/// Angles at every node between every unordered pair of its incident edges,
/// ordered by (j, i, k). Throws DegenerateLayout on a zero-length edge.
std::vector<IncidentAngle> incident_angles(const Graph& g, const Layout& layout);

/// Every other node of each row, sorted by (distance, index).
using NeighborOrder = std::vector<std::vector<int>>;
NeighborOrder knn_order(const Layout& layout, Exec exec = Exec::parallel);

/// Distances from each node to its k-th and (k+1)-th nearest other node
/// (ties by ascending index). Requires 1 <= k and k + 1 <= n - 1.
std::vector<std::pair<double, double>> knn_cutoffs(const Layout& layout, int k);

/// Points rotated by theta about the layout centroid.
Layout rotate_about_centroid(const Layout& layout, double theta);

struct BoxSize {
    double width = 0.0;
    double height = 0.0;
};

/// Softmax-weighted right-minus-left and top-minus-bottom extents after rotation.
BoxSize soft_bounding_box(const Layout& layout, double theta);

/// Exact extents after rotation about the centroid.
BoxSize hard_bounding_box(const Layout& layout, double theta);

/// <softmax(v), v>, computed with the max-shift for stability.
double soft_max_weighted(const std::vector<double>& v);

}  // namespace gdl
