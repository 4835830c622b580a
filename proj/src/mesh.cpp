#include "mlprec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace mlprec {

BoundaryClass classify_point(double x, double y, BoundaryPartition partition)
{
    const bool on_x = (x == 0.0 || x == 1.0);
    const bool on_y = (y == 0.0 || y == 1.0);
    if (!on_x && !on_y)
        return BoundaryClass::interior;
    switch (partition) {
    case BoundaryPartition::all_dirichlet:
        return BoundaryClass::dirichlet;
    case BoundaryPartition::experiment_one:
        // Gamma_D is closed, so the corners belong to it.
        return on_y ? BoundaryClass::dirichlet : BoundaryClass::neumann;
    case BoundaryPartition::experiment_two:
        return BoundaryClass::neumann;
    case BoundaryPartition::custom:
        break;
    }
    throw std::logic_error("classify_point: custom partitions have no rule");
}

Mesh Mesh::unit_square(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("unit_square: n must be at least 1");

    Mesh mesh;
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            Vertex v;
            v.x = (i == n) ? 1.0 : static_cast<double>(i) * h;
            v.y = (j == n) ? 1.0 : static_cast<double>(j) * h;
            v.bc = classify_point(v.x, v.y, BoundaryPartition::all_dirichlet);
            mesh.vertices_.push_back(v);
        }
    }
    auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    std::vector<std::size_t> level0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            level0.push_back(mesh.simplices_.size());
            mesh.simplices_.push_back(Simplex{{a, b, c}, 0, SimplexKind::root, kNone});
            level0.push_back(mesh.simplices_.size());
            mesh.simplices_.push_back(Simplex{{a, c, d}, 0, SimplexKind::root, kNone});
        }
    }
    mesh.levels_.push_back(std::move(level0));
    mesh.level_offsets_ = {0, mesh.vertices_.size()};
    return mesh;
}

double Mesh::signed_area(const Simplex& s) const
{
    const auto& a = vertices_[s.vertices[0]];
    const auto& b = vertices_[s.vertices[1]];
    const auto& c = vertices_[s.vertices[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Mesh Mesh::with_partition(BoundaryPartition partition) const
{
    Mesh out = *this;
    out.partition_ = partition;
    if (partition != BoundaryPartition::custom)
        for (auto& v : out.vertices_)
            v.bc = classify_point(v.x, v.y, partition);
    return out;
}

Mesh classify_boundary(const Mesh& mesh, ExperimentSet set)
{
    return mesh.with_partition(set == ExperimentSet::one ? BoundaryPartition::experiment_one
                                                         : BoundaryPartition::experiment_two);
}

namespace {

double segment_distance(double ax, double ay, double bx, double by)
{
    // distance from the origin to segment [a, b]
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(ax * dx + ay * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(ax + t * dx, ay + t * dy);
}

} // namespace

std::vector<std::size_t> Mesh::mark_by_arc(double radius) const
{
    if (!(radius > 0.0))
        throw std::invalid_argument("mark_by_arc: radius must be positive");

    std::vector<std::size_t> marked;
    for (std::size_t s : levels_.back()) {
        const auto& tri = simplices_[s];
        std::array<const Vertex*, 3> p{&vertices_[tri.vertices[0]], &vertices_[tri.vertices[1]],
                                       &vertices_[tri.vertices[2]]};
        double far = 0.0;
        for (const auto* v : p)
            far = std::max(far, std::hypot(v->x, v->y));

        // Origin inside the (counterclockwise) triangle means distance zero.
        bool inside = true;
        for (int k = 0; k < 3; ++k) {
            const auto* a = p[k];
            const auto* b = p[(k + 1) % 3];
            if ((b->x - a->x) * (0.0 - a->y) - (0.0 - a->x) * (b->y - a->y) < 0.0)
                inside = false;
        }
        double near = 0.0;
        if (!inside) {
            near = segment_distance(p[0]->x, p[0]->y, p[1]->x, p[1]->y);
            near = std::min(near, segment_distance(p[1]->x, p[1]->y, p[2]->x, p[2]->y));
            near = std::min(near, segment_distance(p[2]->x, p[2]->y, p[0]->x, p[0]->y));
        }
        if (near <= radius && radius <= far)
            marked.push_back(s);
    }
    return marked;
}

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

struct EdgeState
{
    std::array<std::size_t, 2> leaves{kNone, kNone};
    bool marked = false;
    std::size_t midpoint = kNone;
};

} // namespace

Mesh Mesh::refine(std::span<const std::size_t> marked, RefinementRule rule) const
{
    if (marked.empty())
        return *this;

    const auto& leaves = levels_.back();
    const int new_level = static_cast<int>(levels_.size());

    std::unordered_map<std::size_t, std::size_t> leaf_position;
    for (std::size_t p = 0; p < leaves.size(); ++p)
        leaf_position.emplace(leaves[p], p);

    // local edge k is opposite local vertex k
    auto edge_of = [&](std::size_t pos, int k) {
        const auto& v = simplices_[leaves[pos]].vertices;
        return edge_key(v[(k + 1) % 3], v[(k + 2) % 3]);
    };

    std::unordered_map<std::uint64_t, EdgeState> edges;
    for (std::size_t p = 0; p < leaves.size(); ++p) {
        for (int k = 0; k < 3; ++k) {
            auto& e = edges[edge_of(p, k)];
            (e.leaves[0] == kNone ? e.leaves[0] : e.leaves[1]) = p;
        }
    }

    auto longest = [&](std::size_t pos) {
        const auto& v = simplices_[leaves[pos]].vertices;
        int best = 0;
        double best_len = -1.0;
        std::uint64_t best_key = 0;
        for (int k = 0; k < 3; ++k) {
            const auto& a = vertices_[v[(k + 1) % 3]];
            const auto& b = vertices_[v[(k + 2) % 3]];
            const double len = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
            const std::uint64_t key = edge_of(pos, k);
            if (len > best_len || (len == best_len && key < best_key)) {
                best = k;
                best_len = len;
                best_key = key;
            }
        }
        return best;
    };

    std::vector<std::size_t> work;
    auto mark_edge = [&](std::uint64_t key) {
        auto& e = edges.at(key);
        if (e.marked)
            return;
        e.marked = true;
        for (std::size_t t : e.leaves)
            if (t != kNone)
                work.push_back(t);
    };

    for (std::size_t s : marked) {
        auto it = leaf_position.find(s);
        if (it == leaf_position.end())
            throw std::invalid_argument("refine: marked simplex is not on the finest level");
        if (rule == RefinementRule::red_green)
            for (int k = 0; k < 3; ++k)
                mark_edge(edge_of(it->second, k));
        else
            mark_edge(edge_of(it->second, longest(it->second)));
    }

    // Closure to a conforming marking.
    while (!work.empty()) {
        const std::size_t t = work.back();
        work.pop_back();
        int count = 0;
        for (int k = 0; k < 3; ++k)
            count += edges.at(edge_of(t, k)).marked ? 1 : 0;
        if (rule == RefinementRule::red_green) {
            if (count == 2)
                for (int k = 0; k < 3; ++k)
                    mark_edge(edge_of(t, k));
        } else if (count > 0) {
            mark_edge(edge_of(t, longest(t)));
        }
    }

    Mesh out = *this;
    auto midpoint = [&](std::size_t a, std::size_t b) {
        auto& e = edges.at(edge_key(a, b));
        if (e.midpoint != kNone)
            return e.midpoint;
        const auto& va = out.vertices_[a];
        const auto& vb = out.vertices_[b];
        Vertex m;
        m.x = 0.5 * (va.x + vb.x);
        m.y = 0.5 * (va.y + vb.y);
        m.level = new_level;
        m.parents = {std::min(a, b), std::max(a, b)};
        if (partition_ != BoundaryPartition::custom) {
            m.bc = classify_point(m.x, m.y, partition_);
        } else if (e.leaves[1] == kNone) {
            // Boundary edge: keep a shared class; a Dirichlet endpoint next
            // to a Neumann one marks the end of a Neumann piece.
            m.bc = va.bc == vb.bc ? va.bc : BoundaryClass::neumann;
        } else {
            m.bc = BoundaryClass::interior;
        }
        e.midpoint = out.vertices_.size();
        out.vertices_.push_back(m);
        return e.midpoint;
    };

    std::vector<std::size_t> next_leaves;
    next_leaves.reserve(leaves.size() * 2);
    auto add_child = [&](std::array<std::size_t, 3> v, SimplexKind kind, std::size_t parent) {
        next_leaves.push_back(out.simplices_.size());
        out.simplices_.push_back(Simplex{v, new_level, kind, parent});
    };

    for (std::size_t p = 0; p < leaves.size(); ++p) {
        const std::size_t s = leaves[p];
        const auto v = simplices_[s].vertices;
        std::array<bool, 3> is_marked{};
        int count = 0;
        for (int k = 0; k < 3; ++k) {
            is_marked[k] = edges.at(edge_of(p, k)).marked;
            count += is_marked[k] ? 1 : 0;
        }
        if (count == 0) {
            next_leaves.push_back(s);
            continue;
        }

        if (rule == RefinementRule::red_green) {
            if (count == 3) {
                const std::size_t m01 = midpoint(v[0], v[1]);
                const std::size_t m12 = midpoint(v[1], v[2]);
                const std::size_t m20 = midpoint(v[2], v[0]);
                add_child({v[0], m01, m20}, SimplexKind::red, s);
                add_child({m01, v[1], m12}, SimplexKind::red, s);
                add_child({m20, m12, v[2]}, SimplexKind::red, s);
                add_child({m01, m12, m20}, SimplexKind::red, s);
            } else if (count == 1) {
                const int k = is_marked[0] ? 0 : (is_marked[1] ? 1 : 2);
                const std::size_t a = v[k], b = v[(k + 1) % 3], c = v[(k + 2) % 3];
                const std::size_t m = midpoint(b, c);
                add_child({a, b, m}, SimplexKind::green, s);
                add_child({a, m, c}, SimplexKind::green, s);
            } else {
                throw std::logic_error("refine: red-green closure left two marked edges");
            }
            continue;
        }

        // Bisection: the longest edge is always marked after the closure;
        // each half is bisected again if its outer edge is marked.
        const int k = longest(p);
        if (!is_marked[k])
            throw std::logic_error("refine: bisection closure left the longest edge unmarked");
        const std::size_t a = v[k], b = v[(k + 1) % 3], c = v[(k + 2) % 3];
        const std::size_t m = midpoint(b, c);
        // A half that is split again is kept as a non-leaf simplex so every
        // green child is one bisection of its parent.
        auto add_half = [&](std::array<std::size_t, 3> half) {
            const std::size_t id = out.simplices_.size();
            out.simplices_.push_back(Simplex{half, new_level, SimplexKind::green, s});
            return id;
        };
        if (is_marked[(k + 2) % 3]) { // edge (a, b)
            const std::size_t mab = midpoint(a, b);
            const std::size_t half = add_half({m, a, b});
            add_child({m, a, mab}, SimplexKind::green, half);
            add_child({m, mab, b}, SimplexKind::green, half);
        } else {
            add_child({a, b, m}, SimplexKind::green, s);
        }
        if (is_marked[(k + 1) % 3]) { // edge (c, a)
            const std::size_t mca = midpoint(c, a);
            const std::size_t half = add_half({m, c, a});
            add_child({m, c, mca}, SimplexKind::green, half);
            add_child({m, mca, a}, SimplexKind::green, half);
        } else {
            add_child({a, m, c}, SimplexKind::green, s);
        }
    }

    out.levels_.push_back(std::move(next_leaves));
    out.level_offsets_.push_back(out.vertices_.size());
    return out;
}

Mesh Mesh::refine_uniform() const
{
    const auto& leaves = levels_.back();
    return refine(leaves, RefinementRule::red_green);
}

void Mesh::write(std::ostream& os) const
{
    const auto& leaves = levels_.back();
    os << "dim 2 nv " << vertices_.size() << " ns " << leaves.size() << '\n';
    const auto old_precision = os.precision(17);
    for (const auto& v : vertices_)
        os << "v " << v.x << ' ' << v.y << ' ' << static_cast<int>(v.bc) << ' ' << v.level << '\n';
    for (std::size_t s : leaves) {
        const auto& t = simplices_[s];
        os << "s " << t.vertices[0] << ' ' << t.vertices[1] << ' ' << t.vertices[2] << ' ' << t.level
           << ' ' << static_cast<int>(t.kind) << '\n';
    }
    os.precision(old_precision);
}

Mesh Mesh::read(std::istream& is)
{
    auto fail = [](const std::string& what) { throw std::runtime_error("Mesh::read: " + what); };

    std::string tag_dim, tag_nv, tag_ns;
    int dim = 0;
    std::size_t nv = 0, ns = 0;
    if (!(is >> tag_dim >> dim >> tag_nv >> nv >> tag_ns >> ns) || tag_dim != "dim" || tag_nv != "nv" ||
        tag_ns != "ns")
        fail("bad header");
    if (dim != 2)
        fail("only dim 2 is supported");

    Mesh mesh;
    mesh.partition_ = BoundaryPartition::custom;
    for (std::size_t i = 0; i < nv; ++i) {
        std::string tag;
        Vertex v;
        int bc = 0;
        if (!(is >> tag >> v.x >> v.y >> bc >> v.level) || tag != "v" || bc < 0 || bc > 2)
            fail("bad vertex line " + std::to_string(i));
        v.bc = static_cast<BoundaryClass>(bc);
        mesh.vertices_.push_back(v);
    }
    std::vector<std::size_t> level0;
    for (std::size_t i = 0; i < ns; ++i) {
        std::string tag;
        Simplex s;
        int kind = 0;
        if (!(is >> tag >> s.vertices[0] >> s.vertices[1] >> s.vertices[2] >> s.level >> kind) ||
            tag != "s" || kind < 0 || kind > 2)
            fail("bad simplex line " + std::to_string(i));
        for (std::size_t v : s.vertices)
            if (v >= nv)
                fail("simplex vertex index out of range");
        s.kind = static_cast<SimplexKind>(kind);
        level0.push_back(mesh.simplices_.size());
        mesh.simplices_.push_back(s);
    }
    mesh.levels_.push_back(std::move(level0));
    mesh.level_offsets_ = {0, nv};
    return mesh;
}

} // namespace mlprec
