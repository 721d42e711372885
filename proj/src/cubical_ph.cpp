#include "voltopo/cubical_ph.hpp"

#include <algorithm>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "voltopo/errors.hpp"
#include "voltopo/io_util.hpp"

namespace voltopo {

namespace {

// Filtration key of a cell: (value rank, dimension, cell index) packed so that
// integer order equals filtration order. Value rank 0 is the largest value.
using Key = std::uint64_t;
constexpr int kDimShift = 32;
constexpr int kRankShift = 34;
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

std::uint32_t cell_of(Key k) { return static_cast<std::uint32_t>(k & 0xFFFFFFFFu); }

// Cell grid of (2nx+1) x (2ny+1) x (2nz+1) entries. Voxel (i,j,k) is the cube at
// (2i+1, 2j+1, 2k+1); a cell's dimension is its number of odd coordinates.
class CellComplex {
public:
    explicit CellComplex(const ScalarVolume& vol) : vol_(vol), dims_(vol.dims()) {
        cx_ = 2 * dims_.nx + 1;
        cy_ = 2 * dims_.ny + 1;
        cz_ = 2 * dims_.nz + 1;
        const std::size_t cells = cx_ * cy_ * cz_;
        if (cells >= kNone || dims_.count() >= (std::size_t{1} << 29)) {
            throw InvalidArgument("volume too large for the cubical complex index space");
        }
        rank_voxels();
        assign_critical_voxels();
        build_keys();
    }

    std::size_t cx() const { return cx_; }
    std::size_t cy() const { return cy_; }
    std::size_t cz() const { return cz_; }
    std::size_t cell_count() const { return crit_.size(); }

    std::uint32_t index(std::size_t a, std::size_t b, std::size_t c) const {
        return static_cast<std::uint32_t>(a + cx_ * (b + cy_ * c));
    }
    std::array<std::size_t, 3> coords(std::uint32_t cell) const {
        return {cell % cx_, (cell / cx_) % cy_, cell / (cx_ * cy_)};
    }

    Key key(std::uint32_t cell) const { return key_[cell]; }
    std::size_t critical_voxel(std::uint32_t cell) const { return voxel_by_rank_[crit_[cell]]; }
    double value(std::uint32_t cell) const { return vol_[critical_voxel(cell)]; }

    std::size_t voxel_of_cube(std::uint32_t cell) const {
        const auto [a, b, c] = coords(cell);
        return dims_.index(a / 2, b / 2, c / 2);
    }
    std::uint32_t cube_of_voxel(std::size_t v) const {
        const auto [i, j, k] = dims_.coords(v);
        return index(2 * i + 1, 2 * j + 1, 2 * k + 1);
    }

    const std::vector<Key>& sorted(int dim) const { return sorted_[dim]; }

private:
    void rank_voxels() {
        const std::size_t n = dims_.count();
        std::vector<std::pair<double, std::uint32_t>> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = {vol_[i], static_cast<std::uint32_t>(i)};
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        voxel_by_rank_.resize(n);
        // Dense rank of distinct values, indexed by voxel rank.
        value_rank_.resize(n);
        std::uint32_t r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && order[i].first != order[i - 1].first) ++r;
            voxel_by_rank_[i] = order[i].second;
            value_rank_[i] = r;
        }
        distinct_values_ = n == 0 ? 0 : r + 1;
    }

    // crit_[cell] = smallest voxel rank among incident voxels. The incident set
    // is a product over axes, so three separable min passes suffice.
    void assign_critical_voxels() {
        crit_.assign(cx_ * cy_ * cz_, kNone);
        for (std::size_t r = 0; r < voxel_by_rank_.size(); ++r) {
            crit_[cube_of_voxel(voxel_by_rank_[r])] = static_cast<std::uint32_t>(r);
        }
        auto spread = [this](std::size_t stride, std::size_t len, auto&& for_each_line) {
            for_each_line([&](std::size_t base) {
                for (std::size_t t = 0; t < len; t += 2) {
                    std::uint32_t m = kNone;
                    if (t > 0) m = std::min(m, crit_[base + (t - 1) * stride]);
                    if (t + 1 < len) m = std::min(m, crit_[base + (t + 1) * stride]);
                    crit_[base + t * stride] = m;
                }
            });
        };
        // x: lines with odd y and z.
        spread(1, cx_, [&](auto&& line) {
            for (std::size_t c = 1; c < cz_; c += 2)
                for (std::size_t b = 1; b < cy_; b += 2) line(index(0, b, c));
        });
        // y: lines with odd z, every x.
        spread(cx_, cy_, [&](auto&& line) {
            for (std::size_t c = 1; c < cz_; c += 2)
                for (std::size_t a = 0; a < cx_; ++a) line(index(a, 0, c));
        });
        // z: every x, y.
        spread(cx_ * cy_, cz_, [&](auto&& line) {
            for (std::size_t b = 0; b < cy_; ++b)
                for (std::size_t a = 0; a < cx_; ++a) line(index(a, b, 0));
        });
    }

    // Keys, plus edges and squares in filtration order. Cells are visited in
    // index order, so a stable counting sort on value rank suffices.
    void build_keys() {
        key_.resize(crit_.size());
        std::array<std::vector<std::uint32_t>, 4> start;
        for (int d = 1; d <= 2; ++d) start[d].assign(distinct_values_ + 1, 0);
        std::uint32_t cell = 0;
        for (std::size_t c = 0; c < cz_; ++c)
            for (std::size_t b = 0; b < cy_; ++b)
                for (std::size_t a = 0; a < cx_; ++a, ++cell) {
                    const auto dim = static_cast<std::uint32_t>((a & 1) + (b & 1) + (c & 1));
                    const std::uint32_t rank = value_rank_[crit_[cell]];
                    key_[cell] = (Key{rank} << kRankShift) | (Key{dim} << kDimShift) | Key{cell};
                    if (dim == 1 || dim == 2) ++start[dim][rank + 1];
                }
        for (int d = 1; d <= 2; ++d) {
            auto& st = start[d];
            std::partial_sum(st.begin(), st.end(), st.begin());
            sorted_[d].resize(st.back());
        }
        for (std::uint32_t i = 0; i < key_.size(); ++i) {
            const int dim = static_cast<int>((key_[i] >> kDimShift) & 3);
            if (dim == 1 || dim == 2) sorted_[dim][start[dim][key_[i] >> kRankShift]++] = key_[i];
        }
    }

    const ScalarVolume& vol_;
    Dims dims_;
    std::size_t cx_ = 0, cy_ = 0, cz_ = 0;
    std::vector<std::uint32_t> voxel_by_rank_;
    std::vector<std::uint32_t> value_rank_;
    std::size_t distinct_values_ = 0;
    std::vector<std::uint32_t> crit_;
    std::vector<Key> key_;
    std::array<std::vector<Key>, 4> sorted_;
};

// The two faces of a cell along `axis` where its coordinate is odd.
std::array<std::uint32_t, 2> faces_along(const CellComplex& cx, std::uint32_t cell, int axis) {
    const std::size_t stride = axis == 0 ? 1 : axis == 1 ? cx.cx() : cx.cx() * cx.cy();
    return {static_cast<std::uint32_t>(cell - stride), static_cast<std::uint32_t>(cell + stride)};
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void attach(std::uint32_t child_root, std::uint32_t parent_root) { parent_[child_root] = parent_root; }

private:
    std::vector<std::uint32_t> parent_;
};

Bar make_bar(const CellComplex& cx, int dim, std::uint32_t birth_cell, std::uint32_t death_cell) {
    Bar bar;
    bar.dim = dim;
    bar.birth_voxel = cx.critical_voxel(birth_cell);
    bar.birth = cx.value(birth_cell);
    bar.death_voxel = cx.critical_voxel(death_cell);
    bar.death = cx.value(death_cell);
    return bar;
}

struct Dim0Result {
    std::vector<Bar> bars;
    std::vector<std::uint8_t> negative_edge;  // indexed by cell
};

// Elder-rule union-find over vertices and edges in filtration order.
Dim0Result persistence_dim0(const CellComplex& cx) {
    Dim0Result out;
    out.negative_edge.assign(cx.cell_count(), 0);
    UnionFind uf(cx.cell_count());
    // Oldest vertex of each component, tracked at the root.
    std::vector<std::uint32_t> oldest(cx.cell_count());
    std::iota(oldest.begin(), oldest.end(), std::uint32_t{0});

    for (Key k : cx.sorted(1)) {
        const std::uint32_t edge = cell_of(k);
        const auto [a, b, c] = cx.coords(edge);
        const int axis = (a & 1) ? 0 : (b & 1) ? 1 : 2;
        const auto ends = faces_along(cx, edge, axis);
        std::uint32_t ru = uf.find(ends[0]);
        std::uint32_t rv = uf.find(ends[1]);
        if (ru == rv) continue;
        if (cx.key(oldest[ru]) > cx.key(oldest[rv])) std::swap(ru, rv);
        // rv holds the younger component; it dies here.
        const std::uint32_t born = oldest[rv];
        if (cx.value(born) != cx.value(edge)) out.bars.push_back(make_bar(cx, 0, born, edge));
        uf.attach(rv, ru);
        out.negative_edge[edge] = 1;
    }

    // The vertex with the smallest key overall carries the essential class.
    std::uint32_t first = cx.index(0, 0, 0);
    first = oldest[uf.find(first)];
    Bar essential;
    essential.dim = 0;
    essential.birth_voxel = cx.critical_voxel(first);
    essential.birth = cx.value(first);
    essential.death = 0.0;
    out.bars.push_back(essential);
    return out;
}

struct Dim2Result {
    std::vector<Bar> bars;
    std::vector<std::uint8_t> positive_square;  // indexed by cell
};

// Voids via the dual graph: cubes plus the unbounded outside, joined by squares
// in reverse filtration order. Each dual component remembers its latest cube;
// on a merge the component whose latest cube is earlier dies, pairing the square
// (birth of the void) with that cube (its death).
Dim2Result persistence_dim2(const CellComplex& cx, std::size_t voxel_count) {
    Dim2Result out;
    out.positive_square.assign(cx.cell_count(), 0);
    const auto outside = static_cast<std::uint32_t>(voxel_count);
    UnionFind uf(voxel_count + 1);
    std::vector<std::uint32_t> latest(voxel_count + 1);
    std::iota(latest.begin(), latest.end(), std::uint32_t{0});

    auto latest_key = [&](std::uint32_t node) {
        return node == outside ? std::numeric_limits<Key>::max() : cx.key(cx.cube_of_voxel(node));
    };
    const auto& squares = cx.sorted(2);
    for (auto it = squares.rbegin(); it != squares.rend(); ++it) {
        const std::uint32_t sq = cell_of(*it);
        const auto [a, b, c] = cx.coords(sq);
        const int axis = !(a & 1) ? 0 : !(b & 1) ? 1 : 2;
        const std::size_t coord = axis == 0 ? a : axis == 1 ? b : c;
        const std::size_t extent = axis == 0 ? cx.cx() : axis == 1 ? cx.cy() : cx.cz();
        const auto cubes = faces_along(cx, sq, axis);
        const auto below = coord == 0 ? outside : static_cast<std::uint32_t>(cx.voxel_of_cube(cubes[0]));
        const auto above =
            coord + 1 == extent ? outside : static_cast<std::uint32_t>(cx.voxel_of_cube(cubes[1]));
        std::uint32_t ru = uf.find(below);
        std::uint32_t rv = uf.find(above);
        if (ru == rv) continue;
        if (latest_key(latest[ru]) < latest_key(latest[rv])) std::swap(ru, rv);
        // rv dies: its latest cube fills the void born at this square.
        const std::uint32_t cube = cx.cube_of_voxel(latest[rv]);
        if (cx.value(sq) != cx.value(cube)) out.bars.push_back(make_bar(cx, 2, sq, cube));
        uf.attach(rv, ru);
        out.positive_square[sq] = 1;
    }
    return out;
}

// Squares having `edge` as a face, minus those that gave birth to a void,
// ascending by key.
void edge_coboundary(const CellComplex& cx, const Dim2Result& d2, std::uint32_t edge, std::vector<Key>& col) {
    const auto coords = cx.coords(edge);
    const std::size_t extent[3] = {cx.cx(), cx.cy(), cx.cz()};
    const std::size_t stride[3] = {1, cx.cx(), cx.cx() * cx.cy()};
    col.clear();
    for (int axis = 0; axis < 3; ++axis) {
        const std::size_t c = coords[static_cast<std::size_t>(axis)];
        if (c & 1) continue;
        if (c > 0 && !d2.positive_square[edge - stride[axis]]) col.push_back(cx.key(edge - stride[axis]));
        if (c + 1 < extent[axis] && !d2.positive_square[edge + stride[axis]]) {
            col.push_back(cx.key(edge + stride[axis]));
        }
    }
    std::sort(col.begin(), col.end());
}

// Symmetric difference of two ascending key lists.
void add_column(std::vector<Key>& col, const Key* first, const Key* last, std::vector<Key>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(col.begin(), col.end(), first, last, std::back_inserter(scratch));
    col.swap(scratch);
}

// Loops by persistent cohomology: coboundary columns of the edges that did not
// merge components, youngest first, each pivoting on its earliest square. Rows
// of squares that gave birth to voids are cleared. Columns that needed no
// reduction are not stored and get rebuilt on demand; reduced ones live in a
// flat pool.
std::vector<Bar> persistence_dim1(const CellComplex& cx, const Dim0Result& d0, const Dim2Result& d2) {
    struct Column {
        std::uint32_t edge;
        std::uint32_t begin;
        std::uint32_t size;  // 0: plain coboundary of `edge`
    };
    std::vector<Bar> bars;
    std::vector<std::uint32_t> slot_of_pivot(cx.cell_count(), kNone);
    std::vector<Column> columns;
    std::vector<Key> pool;
    std::vector<Key> col, other, scratch;

    const auto& edges = cx.sorted(1);
    for (auto it = edges.rbegin(); it != edges.rend(); ++it) {
        const std::uint32_t edge = cell_of(*it);
        if (d0.negative_edge[edge]) continue;
        edge_coboundary(cx, d2, edge, col);

        bool reduced = false;
        while (!col.empty()) {
            const std::uint32_t slot = slot_of_pivot[cell_of(col.front())];
            if (slot == kNone) break;
            const Column& c = columns[slot];
            if (c.size == 0) {
                edge_coboundary(cx, d2, c.edge, other);
                add_column(col, other.data(), other.data() + other.size(), scratch);
            } else {
                add_column(col, pool.data() + c.begin, pool.data() + c.begin + c.size, scratch);
            }
            reduced = true;
        }
        if (col.empty()) {
            throw std::logic_error("cubical reduction: edge column reduced to zero");
        }
        const std::uint32_t sq = cell_of(col.front());
        slot_of_pivot[sq] = static_cast<std::uint32_t>(columns.size());
        Column entry{edge, static_cast<std::uint32_t>(pool.size()), 0};
        if (reduced) {
            entry.size = static_cast<std::uint32_t>(col.size());
            pool.insert(pool.end(), col.begin(), col.end());
        }
        columns.push_back(entry);
        if (cx.value(edge) != cx.value(sq)) bars.push_back(make_bar(cx, 1, edge, sq));
    }
    return bars;
}

}  // namespace

std::vector<Bar> Barcode::of_dim(int dim) const {
    std::vector<Bar> out;
    for (const auto& b : bars) {
        if (b.dim == dim) out.push_back(b);
    }
    return out;
}

std::size_t Barcode::count(int dim) const {
    return static_cast<std::size_t>(
        std::count_if(bars.begin(), bars.end(), [dim](const Bar& b) { return b.dim == dim; }));
}

bool Barcode::has_pairing() const {
    return std::all_of(bars.begin(), bars.end(), [](const Bar& b) { return b.birth_voxel.has_value(); });
}

void sort_bars(std::vector<Bar>& bars) {
    std::stable_sort(bars.begin(), bars.end(), [](const Bar& x, const Bar& y) {
        if (x.dim != y.dim) return x.dim < y.dim;
        if (x.persistence() != y.persistence()) return x.persistence() > y.persistence();
        if (x.birth != y.birth) return x.birth > y.birth;
        return x.birth_voxel < y.birth_voxel;
    });
}

Barcode compute_barcode(const ScalarVolume& vol, const PhOptions& options) {
    if (vol.empty()) throw InvalidArgument("compute_barcode: empty volume");
    if (!vol.is_probability()) throw InvalidArgument("compute_barcode: values must lie in [0, 1]");

    const CellComplex cx(vol);
    Dim0Result d0;
    Dim2Result d2;
    if (options.threads >= 2) {
        auto voids = std::async(std::launch::async, [&] { return persistence_dim2(cx, vol.size()); });
        d0 = persistence_dim0(cx);
        d2 = voids.get();
    } else {
        d0 = persistence_dim0(cx);
        d2 = persistence_dim2(cx, vol.size());
    }
    std::vector<Bar> loops = persistence_dim1(cx, d0, d2);

    Barcode bc;
    bc.bars = std::move(d0.bars);
    bc.bars.insert(bc.bars.end(), loops.begin(), loops.end());
    bc.bars.insert(bc.bars.end(), d2.bars.begin(), d2.bars.end());
    sort_bars(bc.bars);
    return bc;
}

Betti betti_numbers(const Barcode& bc, double p) {
    if (p <= 0.0) return {1, 0, 0};
    Betti out{0, 0, 0};
    for (const auto& b : bc.bars) {
        if (b.dim < 0 || b.dim > 2) continue;
        if (b.birth >= p && p > b.death) ++out[static_cast<std::size_t>(b.dim)];
    }
    return out;
}

std::vector<std::size_t> betti_curve(const Barcode& bc, int dim, std::span<const double> thresholds) {
    if (dim < 0 || dim > 2) throw InvalidArgument("betti_curve: dim must be 0, 1 or 2");
    std::vector<std::size_t> out;
    out.reserve(thresholds.size());
    for (double p : thresholds) out.push_back(betti_numbers(bc, p)[static_cast<std::size_t>(dim)]);
    return out;
}

std::string barcode_to_csv(const Barcode& bc) {
    std::string out = "dim,birth,death,birth_voxel,death_voxel\n";
    for (const auto& b : bc.bars) {
        out += std::to_string(b.dim) + ',' + format_double(b.birth) + ',' + format_double(b.death) + ',';
        if (b.birth_voxel) out += std::to_string(*b.birth_voxel);
        out += ',';
        if (b.death_voxel) out += std::to_string(*b.death_voxel);
        out += '\n';
    }
    return out;
}

}  // namespace voltopo
