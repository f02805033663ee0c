#include "gdl/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "gdl/error.hpp"
#include "gdl/kernels.hpp"
#include "gdl/lovasz.hpp"

namespace gdl {

namespace {

constexpr double kGuard = 1e-12;

inline std::size_t sz(int i) { return static_cast<std::size_t>(i); }

}  // namespace

std::string_view name(CriterionId c) {
    switch (c) {
        case CriterionId::ST: return "ST";
        case CriterionId::IL: return "IL";
        case CriterionId::NP: return "NP";
        case CriterionId::CN: return "CN";
        case CriterionId::CAM: return "CAM";
        case CriterionId::AR: return "AR";
        case CriterionId::ANR: return "ANR";
        case CriterionId::VR: return "VR";
        case CriterionId::GA: return "GA";
    }
    return "?";
}

std::optional<CriterionId> criterion_from_string(std::string_view s) {
    for (auto c : kAllCriteria)
        if (name(c) == s) return c;
    // Column labels used in published result tables.
    if (s == "CA") return CriterionId::CAM;
    if (s == "CR") return CriterionId::CN;
    if (s == "GG") return CriterionId::GA;
    return std::nullopt;
}

bool higher_is_better(CriterionId c) {
    switch (c) {
        case CriterionId::NP:
        case CriterionId::AR:
        case CriterionId::ANR:
        case CriterionId::VR:
        case CriterionId::GA: return true;
        default: return false;
    }
}

double Hyper::resolution_for(int n) const {
    if (target_resolution) return *target_resolution;
    return n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
}

void Hyper::validate() const {
    if (!(angular_sensitivity > 0.0)) throw InvalidArgument("angular sensitivity s must be > 0");
    if (target_resolution && !(*target_resolution > 0.0 && *target_resolution <= 1.0))
        throw InvalidArgument("target resolution r must be in (0, 1]");
    if (rotations < 1) throw InvalidArgument("rotation sample count must be >= 1");
}

std::vector<int> resolve_neighborhood_sizes(const Graph& g, const NpConfig& cfg) {
    const int n = g.node_count();
    if (cfg.k) {
        if (*cfg.k < 1 || *cfg.k > n - 2)
            throw InvalidArgument(fmt::format("neighbourhood size k = {} out of range [1, {}]", *cfg.k, n - 2));
        return std::vector<int>(sz(n), *cfg.k);
    }
    std::vector<int> sizes(sz(n));
    for (int i = 0; i < n; ++i) sizes[sz(i)] = g.degree(i);
    return sizes;
}

// ---- stress -----------------------------------------------------------------

LossResult loss_stress(const Graph& g, const DistanceMatrix& d, const Layout& x, Exec exec) {
    validate_layout(g, x);
    if (d.size() != g.node_count()) throw InvalidArgument("distance matrix size does not match graph");
    return exec == Exec::serial ? kernels::stress_serial(x, d) : kernels::stress_omp(x, d);
}

double stress_value(const DistanceMatrix& d, const Layout& x) {
    double s = 0.0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dij = d(i, j);
            const double r = norm(x[sz(i)] - x[sz(j)]) - dij;
            s += r * r / (dij * dij);
        }
    }
    return s;
}

// ---- ideal edge length ------------------------------------------------------

namespace {

std::vector<double> edge_lengths(const Graph& g, const Layout& x) {
    std::vector<double> len;
    len.reserve(sz(g.edge_count()));
    for (const auto& e : g.edges()) len.push_back(norm(x[sz(e.u)] - x[sz(e.v)]));
    return len;
}

std::vector<double> target_lengths(const Graph& g, const std::vector<double>& len) {
    if (g.has_ideal_lengths()) return g.ideal_lengths();
    double mean = 0.0;
    for (double l : len) mean += l;
    mean /= static_cast<double>(len.size());
    return std::vector<double>(len.size(), mean);
}

}  // namespace

LossResult loss_ideal_edge_length(const Graph& g, const Layout& x) {
    validate_layout(g, x);
    auto out = LossResult::zeros(x.size());
    const int m = g.edge_count();
    if (m == 0) return out;
    const auto len = edge_lengths(g, x);
    for (int e = 0; e < m; ++e) {
        if (len[sz(e)] == 0.0)
            throw DegenerateLayout(fmt::format("zero-length edge ({}, {})", g.edge(e).u, g.edge(e).v));
    }
    const auto target = target_lengths(g, len);
    double mean_sq = 0.0;
    for (int e = 0; e < m; ++e) {
        const double r = (len[sz(e)] - target[sz(e)]) / target[sz(e)];
        mean_sq += r * r;
    }
    mean_sq /= static_cast<double>(m);
    out.value = std::sqrt(mean_sq);
    if (out.value < 1e-300) return out;
    for (int e = 0; e < m; ++e) {
        const Edge& ed = g.edge(e);
        const double l = target[sz(e)];
        const double r = (len[sz(e)] - l) / l;
        const double coeff = r / (l * static_cast<double>(m) * out.value);
        const Vec2 gdir = (coeff / len[sz(e)]) * (x[sz(ed.u)] - x[sz(ed.v)]);
        out.grad[sz(ed.u)] += gdir;
        out.grad[sz(ed.v)] -= gdir;
    }
    return out;
}

double ideal_edge_length_value(const Graph& g, const Layout& x) {
    const int m = g.edge_count();
    if (m == 0) return 0.0;
    const auto len = edge_lengths(g, x);
    const auto target = target_lengths(g, len);
    double mean_sq = 0.0;
    for (int e = 0; e < m; ++e) {
        if (target[sz(e)] == 0.0) return 0.0;  // every edge collapsed: all equal
        const double r = (len[sz(e)] - target[sz(e)]) / target[sz(e)];
        mean_sq += r * r;
    }
    return std::sqrt(mean_sq / static_cast<double>(m));
}

// ---- neighbourhood preservation --------------------------------------------

std::vector<double> neighborhood_scores(const Layout& x, const std::vector<int>& sizes, Exec exec) {
    const int n = static_cast<int>(x.size());
    const auto order = knn_order(x, exec);
    std::vector<double> scores(sz(n) * sz(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const int k = sizes[sz(i)];
        const auto& row = order[sz(i)];
        if (k < 1 || row.empty()) continue;
        const Vec2 pi = x[sz(i)];
        const double dk = norm(pi - x[sz(row[sz(k - 1)])]);
        // With every other node a neighbour there is no (k+1)-th distance; put the
        // cutoff one unit past the farthest node.
        const double cutoff = k < n - 1 ? 0.5 * (dk + norm(pi - x[sz(row[sz(k)])])) : dk + 1.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            scores[sz(i) * sz(n) + sz(j)] = -(norm(pi - x[sz(j)]) - cutoff);
        }
        if (k < n - 1) {
            // The k-th and (k+1)-th nearest sit at +-half the gap; keep them exactly opposite.
            const double half = 0.5 * (norm(pi - x[sz(row[sz(k)])]) - dk);
            scores[sz(i) * sz(n) + sz(row[sz(k - 1)])] = half;
            scores[sz(i) * sz(n) + sz(row[sz(k)])] = -half;
        }
    }
    return scores;
}

LossResult loss_neighborhood(const Graph& g, const Layout& x, const NpConfig& cfg, Exec exec) {
    validate_layout(g, x);
    const int n = g.node_count();
    auto out = LossResult::zeros(x.size());
    if (n < 2) return out;
    const auto sizes = resolve_neighborhood_sizes(g, cfg);
    const auto scores = neighborhood_scores(x, sizes, exec);

    // Off-diagonal entries in row-major order.
    std::vector<double> flat;
    std::vector<std::uint8_t> labels;
    flat.reserve(sz(n) * sz(n - 1));
    labels.reserve(flat.capacity());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            flat.push_back(scores[sz(i) * sz(n) + sz(j)]);
            labels.push_back(g.adjacent(i, j) ? 1 : 0);
        }
    const auto lh = lovasz_hinge(flat, labels);
    out.value = lh.value;

    // score_ij = cutoff_i - |X_i - X_j|, so d value / d dist_ij = -d value / d score_ij.
    std::vector<double> coeff(sz(n) * sz(n), 0.0);
    std::size_t p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            coeff[sz(i) * sz(n) + sz(j)] = -lh.grad[p++];
        }
    out.grad = exec == Exec::serial ? kernels::distance_chain_serial(x, coeff) : kernels::distance_chain_omp(x, coeff);
    return out;
}

double neighborhood_jaccard(const Graph& g, const Layout& x, const NpConfig& np) {
    validate_layout(g, x);
    const int n = g.node_count();
    if (n < 2) return 1.0;
    const auto sizes = resolve_neighborhood_sizes(g, np);
    const auto order = knn_order(x);
    std::size_t both = 0, either = 0;
    std::vector<std::uint8_t> knn(sz(n));
    for (int i = 0; i < n; ++i) {
        std::fill(knn.begin(), knn.end(), 0);
        const auto& row = order[sz(i)];
        for (int r = 0; r < sizes[sz(i)] && r < static_cast<int>(row.size()); ++r) knn[sz(row[sz(r)])] = 1;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const bool a = g.adjacent(i, j);
            const bool k = knn[sz(j)] != 0;
            both += (a && k) ? 1 : 0;
            either += (a || k) ? 1 : 0;
        }
    }
    return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

// ---- crossings (EM separators) ---------------------------------------------

namespace {

struct PairNodes {
    int node[4];
    double t[4];
};

PairNodes pair_nodes(const Graph& g, const CrossingPair& pair) {
    const Edge& e1 = g.edge(pair.first);
    const Edge& e2 = g.edge(pair.second);
    return {{e1.u, e1.v, e2.u, e2.v}, {1.0, 1.0, -1.0, -1.0}};
}

const Separator& find_separator(const CrossingSeparators& seps, const CrossingPair& pair) {
    auto it = seps.find(pair);
    if (it == seps.end())
        throw InvalidArgument(fmt::format("no separator for crossing pair ({}, {})", pair.first, pair.second));
    return it->second;
}

// Adds scale * (hinge + ||w||^2) of one pair into out.
void add_crossing_term(const Graph& g, const Layout& x, const CrossingPair& pair, const Separator& sep, double scale,
                       LossResult& out) {
    const auto pn = pair_nodes(g, pair);
    double v = dot(sep.w, sep.w);
    for (int a = 0; a < 4; ++a) {
        const double margin = 1.0 - pn.t[a] * (dot(x[sz(pn.node[a])], sep.w) + sep.b);
        if (margin <= 0.0) continue;
        v += margin;
        out.grad[sz(pn.node[a])] -= (scale * pn.t[a]) * sep.w;
    }
    out.value += scale * v;
}

}  // namespace

double separator_hinge(const Graph& g, const Layout& x, const CrossingPair& pair, const Separator& sep) {
    const auto pn = pair_nodes(g, pair);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += std::max(0.0, 1.0 - pn.t[a] * (dot(x[sz(pn.node[a])], sep.w) + sep.b));
    return v;
}

LossResult loss_crossings(const Graph& g, const Layout& x, const std::vector<CrossingPair>& pairs,
                          const CrossingSeparators& seps) {
    validate_layout(g, x);
    auto out = LossResult::zeros(x.size());
    for (const auto& pair : pairs) add_crossing_term(g, x, pair, find_separator(seps, pair), 1.0, out);
    return out;
}

LossResult loss_crossings(const Graph& g, const Layout& x, const CrossingSeparators& seps) {
    return loss_crossings(g, x, detect_crossings(g, x), seps);
}

Separator initial_separator(const Graph& g, const Layout& x, const CrossingPair& pair) {
    const Edge& e1 = g.edge(pair.first);
    const Edge& e2 = g.edge(pair.second);
    const Vec2 m1 = 0.5 * (x[sz(e1.u)] + x[sz(e1.v)]);
    const Vec2 m2 = 0.5 * (x[sz(e2.u)] + x[sz(e2.v)]);
    Vec2 dir = m1 - m2;
    if (norm(dir) < kGuard) dir = perp(x[sz(e1.v)] - x[sz(e1.u)]);
    const double len = norm(dir);
    Separator sep;
    sep.w = len > 0.0 ? (1.0 / len) * dir : Vec2{1.0, 0.0};
    sep.b = -dot(sep.w, 0.5 * (m1 + m2));
    return sep;
}

CrossingSeparators fit_separators(const Graph& g, const Layout& x, const std::vector<CrossingPair>& pairs,
                                  const CrossingSeparators& seps, const SeparatorFit& fit) {
    validate_layout(g, x);
    CrossingSeparators out;
    for (const auto& pair : pairs) {
        auto it = seps.find(pair);
        Separator sep = it != seps.end() ? it->second : initial_separator(g, x, pair);
        const auto pn = pair_nodes(g, pair);
        for (int s = 0; s < fit.steps; ++s) {
            Vec2 gw = 2.0 * sep.w;
            double gb = 0.0;
            for (int a = 0; a < 4; ++a) {
                const Vec2 p = x[sz(pn.node[a])];
                if (1.0 - pn.t[a] * (dot(p, sep.w) + sep.b) <= 0.0) continue;
                gw -= pn.t[a] * p;
                gb -= pn.t[a];
            }
            // Both M steps use the gradient at the same (w, b).
            sep.w -= fit.lr * gw;
            sep.b -= fit.lr * gb;
        }
        out.emplace(pair, sep);
    }
    return out;
}

CrossingSeparators fit_separators(const Graph& g, const Layout& x, const CrossingSeparators& seps,
                                  const SeparatorFit& fit) {
    return fit_separators(g, x, detect_crossings(g, x), seps, fit);
}

// ---- crossing angle ---------------------------------------------------------

namespace {

void add_crossing_angle_term(const Graph& g, const Layout& x, const CrossingPair& pair, double scale,
                             LossResult& out) {
    const Edge& e1 = g.edge(pair.first);
    const Edge& e2 = g.edge(pair.second);
    const Vec2 a = x[sz(e1.u)] - x[sz(e1.v)];
    const Vec2 b = x[sz(e2.u)] - x[sz(e2.v)];
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw DegenerateLayout("zero-length edge in crossing pair");
    const double c = dot(a, b) / (na * nb);
    out.value += scale * c * c;
    const Vec2 dca = (1.0 / (na * nb)) * b - (c / (na * na)) * a;
    const Vec2 dcb = (1.0 / (na * nb)) * a - (c / (nb * nb)) * b;
    const double k = scale * 2.0 * c;
    out.grad[sz(e1.u)] += k * dca;
    out.grad[sz(e1.v)] -= k * dca;
    out.grad[sz(e2.u)] += k * dcb;
    out.grad[sz(e2.v)] -= k * dcb;
}

}  // namespace

LossResult loss_crossing_angle(const Graph& g, const Layout& x, const std::vector<CrossingPair>& pairs) {
    validate_layout(g, x);
    auto out = LossResult::zeros(x.size());
    for (const auto& pair : pairs) add_crossing_angle_term(g, x, pair, 1.0, out);
    return out;
}

LossResult loss_crossing_angle(const Graph& g, const Layout& x) {
    return loss_crossing_angle(g, x, detect_crossings(g, x));
}

double crossing_angle_quality(const Graph& g, const Layout& x) {
    double worst = 0.0;
    for (const auto& pair : detect_crossings(g, x)) {
        const double theta = crossing_angle(g, pair, x);
        worst = std::max(worst, std::abs(theta - std::numbers::pi / 2) / (std::numbers::pi / 2));
    }
    return worst;
}

// ---- aspect ratio -----------------------------------------------------------

namespace {

struct SoftExtent {
    double extent = 0.0;
    std::vector<double> grad;  // d extent / d coordinate
};

// <softmax(v), v> - <softmax(-v), v> and its gradient.
SoftExtent soft_extent(const std::vector<double>& v) {
    const std::size_t n = v.size();
    const double hi = *std::max_element(v.begin(), v.end());
    const double lo = *std::min_element(v.begin(), v.end());
    std::vector<double> p(n), q(n);
    double zp = 0.0, zq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(v[i] - hi);
        q[i] = std::exp(lo - v[i]);
        zp += p[i];
        zq += q[i];
    }
    double f = 0.0, h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] /= zp;
        q[i] /= zq;
        f += p[i] * v[i];
        h += q[i] * v[i];
    }
    SoftExtent out;
    out.extent = f - h;
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.grad[i] = p[i] * (1.0 + v[i] - f) - q[i] * (1.0 - v[i] + h);
    return out;
}

}  // namespace

LossResult loss_aspect_ratio(const Layout& x, const Hyper& hyper) {
    const std::size_t n = x.size();
    if (n < 2) throw InvalidArgument("aspect ratio needs at least two nodes");
    auto out = LossResult::zeros(n);
    for (int r = 0; r < hyper.rotations; ++r) {
        const double theta = 2.0 * std::numbers::pi * r / hyper.rotations;
        const double cs = std::cos(theta), sn = std::sin(theta);
        const Layout rot = rotate_about_centroid(x, theta);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rot[i].x;
            ys[i] = rot[i].y;
        }
        const auto w = soft_extent(xs);
        const auto h = soft_extent(ys);
        if (w.extent + h.extent <= kGuard) throw DegenerateLayout("all nodes coincide");
        const double we = std::max(w.extent, kGuard);
        const double he = std::max(h.extent, kGuard);
        const double sum = we + he;
        out.value += std::log(sum) - 0.5 * std::log(we) - 0.5 * std::log(he);
        const double dw = 1.0 / sum - 0.5 / we;
        const double dh = 1.0 / sum - 0.5 / he;
        // Back through the rotation; the centroid term is the mean of the rotated gradient.
        Vec2 mean{};
        Gradient local(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double gx = dw * w.grad[i];
            const double gy = dh * h.grad[i];
            local[i] = {cs * gx + sn * gy, -sn * gx + cs * gy};
            mean += local[i];
        }
        mean *= 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out.grad[i] += local[i] - mean;
    }
    return out;
}

double aspect_ratio_quality(const Layout& x, int rotations) {
    double worst = 1.0;
    for (int r = 0; r < rotations; ++r) {
        const auto box = hard_bounding_box(x, 2.0 * std::numbers::pi * r / rotations);
        const double hi = std::max(box.width, box.height);
        const double lo = std::min(box.width, box.height);
        worst = std::min(worst, hi > 0.0 ? lo / hi : 1.0);
    }
    return worst;
}

// ---- angular resolution -----------------------------------------------------

namespace {

void add_angle_term(const Layout& x, int i, int j, int k, double s, double scale, LossResult& out) {
    const Vec2 a = x[sz(i)] - x[sz(j)];
    const Vec2 b = x[sz(k)] - x[sz(j)];
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw DegenerateLayout(fmt::format("zero-length edge at node {}", j));
    const double cr = cross(a, b);
    const double phi = std::atan2(std::abs(cr), dot(a, b));
    const double e = std::exp(-s * phi);
    out.value += scale * e;
    if (cr == 0.0) return;  // phi at 0 or pi: zero subgradient
    const double sgn = cr > 0.0 ? 1.0 : -1.0;
    // d phi / d a = -n_a / |a| with n_a the unit normal of a pointing toward b.
    const Vec2 na_dir = (sgn / na) * perp(a);
    const Vec2 nb_dir = (-sgn / nb) * perp(b);
    const Vec2 dphi_da = (-1.0 / na) * na_dir;
    const Vec2 dphi_db = (-1.0 / nb) * nb_dir;
    const double dl = scale * (-s * e);
    out.grad[sz(i)] += dl * dphi_da;
    out.grad[sz(k)] += dl * dphi_db;
    out.grad[sz(j)] -= dl * (dphi_da + dphi_db);
}

struct AngleTriple {
    int i, j, k;
};

std::vector<AngleTriple> angle_triples(const Graph& g) {
    std::vector<AngleTriple> out;
    for (int j = 0; j < g.node_count(); ++j) {
        const auto& nb = g.neighbors(j);
        for (std::size_t p = 0; p < nb.size(); ++p)
            for (std::size_t q = p + 1; q < nb.size(); ++q) out.push_back({nb[p], j, nb[q]});
    }
    return out;
}

}  // namespace

LossResult loss_angular_resolution(const Graph& g, const Layout& x, const Hyper& hyper) {
    validate_layout(g, x);
    auto out = LossResult::zeros(x.size());
    for (const auto& t : angle_triples(g)) add_angle_term(x, t.i, t.j, t.k, hyper.angular_sensitivity, 1.0, out);
    return out;
}

double angular_resolution_quality(const Graph& g, const Layout& x) {
    const int dmax = g.max_degree();
    if (dmax < 2) return 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : angle_triples(g)) {
        const Vec2 a = x[sz(t.i)] - x[sz(t.j)];
        const Vec2 b = x[sz(t.k)] - x[sz(t.j)];
        best = std::min(best, std::atan2(std::abs(cross(a, b)), dot(a, b)));
    }
    return std::clamp(best / (2.0 * std::numbers::pi / dmax), 0.0, 1.0);
}

// ---- vertex resolution ------------------------------------------------------

LossResult loss_vertex_resolution(const Layout& x, const Hyper& hyper, Exec exec) {
    const int n = static_cast<int>(x.size());
    if (n < 2) throw InvalidArgument("vertex resolution needs at least two nodes");
    const double dmax = exec == Exec::serial ? kernels::diameter_serial(x) : kernels::diameter_omp(x);
    if (dmax <= kGuard) throw DegenerateLayout("all nodes coincide");
    const double scale = hyper.resolution_for(n) * dmax;
    return exec == Exec::serial ? kernels::vertex_resolution_serial(x, scale)
                                : kernels::vertex_resolution_omp(x, scale);
}

double vertex_resolution_quality(const Layout& x, double target_resolution) {
    if (x.size() < 2) return 1.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double d = norm(x[i] - x[j]);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    if (hi <= 0.0) return 0.0;
    return std::min(1.0, lo / (target_resolution * hi));
}

// ---- Gabriel ----------------------------------------------------------------

LossResult loss_gabriel(const Graph& g, const Layout& x, Exec exec) {
    validate_layout(g, x);
    return exec == Exec::serial ? kernels::gabriel_serial(g, x) : kernels::gabriel_omp(g, x);
}

double gabriel_quality(const Graph& g, const Layout& x) {
    double best = 1.0;
    const int n = g.node_count();
    for (const auto& e : g.edges()) {
        const Vec2 c = 0.5 * (x[sz(e.u)] + x[sz(e.v)]);
        const double r = 0.5 * norm(x[sz(e.u)] - x[sz(e.v)]);
        if (r == 0.0) continue;  // empty disk
        for (int k = 0; k < n; ++k) {
            if (k == e.u || k == e.v) continue;
            best = std::min(best, norm(x[sz(k)] - c) / r);
        }
    }
    return best;
}

// ---- dispatch ---------------------------------------------------------------

namespace {

const std::vector<CrossingPair>& crossings_of(const EvalContext& ctx, const Layout& x,
                                              std::vector<CrossingPair>& scratch) {
    if (ctx.crossings) return *ctx.crossings;
    scratch = detect_crossings(*ctx.graph, x, ctx.exec);
    return scratch;
}

}  // namespace

LossResult evaluate(CriterionId c, const EvalContext& ctx, const Layout& x) {
    const Graph& g = *ctx.graph;
    std::vector<CrossingPair> scratch;
    switch (c) {
        case CriterionId::ST: return loss_stress(g, *ctx.distances, x, ctx.exec);
        case CriterionId::IL: return loss_ideal_edge_length(g, x);
        case CriterionId::NP: return loss_neighborhood(g, x, ctx.np, ctx.exec);
        case CriterionId::CN: {
            if (!ctx.separators) throw InvalidArgument("crossing loss needs separators");
            return loss_crossings(g, x, crossings_of(ctx, x, scratch), *ctx.separators);
        }
        case CriterionId::CAM: return loss_crossing_angle(g, x, crossings_of(ctx, x, scratch));
        case CriterionId::AR: return loss_aspect_ratio(x, ctx.hyper);
        case CriterionId::ANR: return loss_angular_resolution(g, x, ctx.hyper);
        case CriterionId::VR: return loss_vertex_resolution(x, ctx.hyper, ctx.exec);
        case CriterionId::GA: return loss_gabriel(g, x, ctx.exec);
    }
    throw InvalidArgument("unknown criterion");
}

std::size_t term_count(CriterionId c, const EvalContext& ctx) {
    const Graph& g = *ctx.graph;
    const auto n = static_cast<std::size_t>(g.node_count());
    switch (c) {
        case CriterionId::ST:
        case CriterionId::VR: return n * (n - 1) / 2;
        case CriterionId::GA: return n >= 2 ? static_cast<std::size_t>(g.edge_count()) * (n - 2) : 0;
        case CriterionId::ANR: {
            std::size_t t = 0;
            for (int j = 0; j < g.node_count(); ++j) {
                const auto d = static_cast<std::size_t>(g.degree(j));
                t += d * (d - (d > 0 ? 1 : 0)) / 2;
            }
            return t;
        }
        case CriterionId::CN:
        case CriterionId::CAM: return ctx.crossings ? ctx.crossings->size() : 0;
        default: return 0;
    }
}

namespace {

// Uniform unordered pair i != j.
std::pair<int, int> sample_pair(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> first(0, n - 1);
    std::uniform_int_distribution<int> second(0, n - 2);
    int i = first(rng);
    int j = second(rng);
    if (j >= i) ++j;
    return {i, j};
}

}  // namespace

LossResult evaluate_sampled(CriterionId c, const EvalContext& ctx, const Layout& x, std::mt19937_64& rng, int batch) {
    if (batch < 1) throw InvalidArgument("batch must be >= 1");
    const Graph& g = *ctx.graph;
    const int n = g.node_count();
    auto out = LossResult::zeros(x.size());
    const std::size_t terms = term_count(c, ctx);

    switch (c) {
        case CriterionId::IL:
        case CriterionId::NP:
        case CriterionId::AR: return evaluate(c, ctx, x);
        default: break;
    }
    if (terms == 0) {
        if (c == CriterionId::CN || c == CriterionId::CAM) {
            if (!ctx.crossings) return evaluate(c, ctx, x);
        }
        return out;
    }
    validate_layout(g, x);
    const double scale = static_cast<double>(terms) / batch;

    switch (c) {
        case CriterionId::ST: {
            const DistanceMatrix& d = *ctx.distances;
            for (int s = 0; s < batch; ++s) {
                auto [i, j] = sample_pair(n, rng);
                const Vec2 diff = x[sz(i)] - x[sz(j)];
                const double dist = norm(diff);
                if (dist < kernels::kCoincidentTolerance) throw CoincidentNodes(std::min(i, j), std::max(i, j));
                const double dij = d(i, j);
                const double w = 1.0 / (dij * dij);
                const double r = dist - dij;
                out.value += scale * w * r * r;
                const Vec2 gr = (scale * 2.0 * w * r / dist) * diff;
                out.grad[sz(i)] += gr;
                out.grad[sz(j)] -= gr;
            }
            break;
        }
        case CriterionId::VR: {
            const double dmax = ctx.exec == Exec::serial ? kernels::diameter_serial(x) : kernels::diameter_omp(x);
            if (dmax <= kGuard) throw DegenerateLayout("all nodes coincide");
            const double sc = ctx.hyper.resolution_for(n) * dmax;
            for (int s = 0; s < batch; ++s) {
                auto [i, j] = sample_pair(n, rng);
                const Vec2 diff = x[sz(i)] - x[sz(j)];
                const double dist = norm(diff);
                const double t = 1.0 - dist / sc;
                if (t <= 0.0) continue;
                out.value += scale * t * t;
                if (dist == 0.0) continue;
                const Vec2 gr = (scale * -2.0 * t / (sc * dist)) * diff;
                out.grad[sz(i)] += gr;
                out.grad[sz(j)] -= gr;
            }
            break;
        }
        case CriterionId::GA: {
            std::uniform_int_distribution<int> edge_pick(0, g.edge_count() - 1);
            std::uniform_int_distribution<int> node_pick(0, n - 3);
            for (int s = 0; s < batch; ++s) {
                const Edge& e = g.edge(edge_pick(rng));
                // k-th node of V \ {u, v} in index order.
                int k = node_pick(rng);
                if (k >= e.u) ++k;
                if (k >= e.v) ++k;
                const Vec2 a = x[sz(e.u)], b = x[sz(e.v)];
                const double len = norm(a - b);
                if (len == 0.0) throw DegenerateLayout(fmt::format("zero-length edge ({}, {})", e.u, e.v));
                const Vec2 center = 0.5 * (a + b);
                const Vec2 unit = (1.0 / len) * (a - b);
                const Vec2 v = x[sz(k)] - center;
                const double dist = norm(v);
                const double delta = 0.5 * len - dist;
                if (delta <= 0.0) continue;
                out.value += scale * delta * delta;
                const Vec2 vhat = dist > 0.0 ? (1.0 / dist) * v : Vec2{};
                const double cc = scale * 2.0 * delta;
                out.grad[sz(k)] -= cc * vhat;
                out.grad[sz(e.u)] += (0.5 * cc) * (unit + vhat);
                out.grad[sz(e.v)] += (0.5 * cc) * (vhat - unit);
            }
            break;
        }
        case CriterionId::ANR: {
            const auto triples = angle_triples(g);
            std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
            for (int s = 0; s < batch; ++s) {
                const auto& t = triples[pick(rng)];
                add_angle_term(x, t.i, t.j, t.k, ctx.hyper.angular_sensitivity, scale, out);
            }
            break;
        }
        case CriterionId::CN: {
            if (!ctx.separators) throw InvalidArgument("crossing loss needs separators");
            std::uniform_int_distribution<std::size_t> pick(0, ctx.crossings->size() - 1);
            for (int s = 0; s < batch; ++s) {
                const auto& pair = (*ctx.crossings)[pick(rng)];
                add_crossing_term(g, x, pair, find_separator(*ctx.separators, pair), scale, out);
            }
            break;
        }
        case CriterionId::CAM: {
            std::uniform_int_distribution<std::size_t> pick(0, ctx.crossings->size() - 1);
            for (int s = 0; s < batch; ++s) add_crossing_angle_term(g, x, (*ctx.crossings)[pick(rng)], scale, out);
            break;
        }
        default: break;
    }
    return out;
}

// ---- quality ----------------------------------------------------------------

double quality(CriterionId c, const Graph& g, const DistanceMatrix& d, const Layout& x, const NpConfig& np,
               const Hyper& hyper) {
    validate_layout(g, x);
    switch (c) {
        case CriterionId::ST: return stress_value(d, x);
        case CriterionId::IL: return ideal_edge_length_value(g, x);
        case CriterionId::NP: return neighborhood_jaccard(g, x, np);
        case CriterionId::CN: return static_cast<double>(detect_crossings(g, x).size());
        case CriterionId::CAM: return crossing_angle_quality(g, x);
        case CriterionId::AR: return aspect_ratio_quality(x, hyper.rotations);
        case CriterionId::ANR: return angular_resolution_quality(g, x);
        case CriterionId::VR: return vertex_resolution_quality(x, hyper.resolution_for(g.node_count()));
        case CriterionId::GA: return gabriel_quality(g, x);
    }
    throw InvalidArgument("unknown criterion");
}

PerCriterion<double> quality_all(const Graph& g, const DistanceMatrix& d, const Layout& x, const NpConfig& np,
                                 const Hyper& hyper) {
    PerCriterion<double> out;
    for (auto c : kAllCriteria) out[c] = quality(c, g, d, x, np, hyper);
    return out;
}

}  // namespace gdl
