#include "pdl/clusters.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace pdl {

// ---- cell sets

CellSet normalized(CellSet cells) {
    if (cells.empty()) return cells;
    int mx = cells[0].x, my = cells[0].y;
    for (auto& c : cells) {
        mx = std::min(mx, c.x);
        my = std::min(my, c.y);
    }
    for (auto& c : cells) {
        c.x -= mx;
        c.y -= my;
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

CellSet transformed(const CellSet& cells, int sym) {
    CellSet out;
    out.reserve(cells.size());
    for (auto c : cells) {
        int x = c.x, y = c.y;
        if (sym & 4) std::swap(x, y);
        if (sym & 1) x = -x;
        if (sym & 2) y = -y;
        out.push_back({x, y});
    }
    return normalized(std::move(out));
}

std::pair<CellSet, int> dihedral_canonical(const CellSet& cells) {
    CellSet best = transformed(cells, 0);
    int which = 0;
    for (int s = 1; s < 8; ++s) {
        auto t = transformed(cells, s);
        if (t < best) {
            best = std::move(t);
            which = s;
        }
    }
    return {best, which};
}

std::string encode(const CellSet& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(cells[i].x) + ',' + std::to_string(cells[i].y);
    }
    return s;
}

namespace {
constexpr std::array<std::array<int, 2>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

bool contains(const CellSet& sorted, Cell c) { return std::binary_search(sorted.begin(), sorted.end(), c); }
}  // namespace

bool is_connected(const CellSet& cells) {
    if (cells.empty()) return false;
    CellSet s = cells;
    std::sort(s.begin(), s.end());
    std::set<Cell> seen{s[0]};
    std::deque<Cell> q{s[0]};
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        for (auto [dx, dy] : kSteps) {
            Cell n{c.x + dx, c.y + dy};
            if (contains(s, n) && seen.insert(n).second) q.push_back(n);
        }
    }
    return seen.size() == s.size();
}

Polyomino::Polyomino(CellSet cells) : cells_(normalized(std::move(cells))) {
    if (cells_.empty() || !is_connected(cells_)) throw InvalidParams("polyomino must be nonempty and edge-connected");
}

int Polyomino::width() const noexcept {
    int m = 0;
    for (auto& c : cells_) m = std::max(m, c.x);
    return cells_.empty() ? 0 : m + 1;
}

int Polyomino::height() const noexcept {
    int m = 0;
    for (auto& c : cells_) m = std::max(m, c.y);
    return cells_.empty() ? 0 : m + 1;
}

std::vector<Polyomino> enumerate_fixed_polyominoes(int k) {
    if (k < 1 || k > 10) throw InvalidParams("polyomino order must be in 1..10");
    std::set<CellSet> level{CellSet{{0, 0}}};
    for (int n = 1; n < k; ++n) {
        std::set<CellSet> next;
        for (auto& p : level)
            for (auto c : p)
                for (auto [dx, dy] : kSteps) {
                    Cell nc{c.x + dx, c.y + dy};
                    if (contains(p, nc)) continue;
                    CellSet q = p;
                    q.push_back(nc);
                    next.insert(normalized(std::move(q)));
                }
        level.swap(next);
    }
    std::vector<Polyomino> out;
    for (auto& p : level) out.emplace_back(p);
    return out;
}

// ---- seeds

std::string name(SeedSpecies s) {
    switch (s) {
    case SeedSpecies::Line3: return "Line3";
    case SeedSpecies::Corner3: return "Corner3";
    case SeedSpecies::Line4: return "Line4";
    case SeedSpecies::Corner4: return "Corner4";
    case SeedSpecies::Hat4: return "Hat4";
    case SeedSpecies::Turn4: return "Turn4";
    case SeedSpecies::Square4: return "Square4";
    case SeedSpecies::Defector1: return "Defector1";
    case SeedSpecies::Defector2: return "Defector2";
    }
    return "?";
}

namespace {
constexpr std::array kAllSpecies{SeedSpecies::Line3, SeedSpecies::Corner3, SeedSpecies::Line4,
                                 SeedSpecies::Corner4, SeedSpecies::Hat4,  SeedSpecies::Turn4,
                                 SeedSpecies::Square4, SeedSpecies::Defector1, SeedSpecies::Defector2};

std::string lower(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != '-' && c != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}
}  // namespace

std::optional<SeedSpecies> parse_species(std::string_view s) {
    for (auto sp : kAllSpecies)
        if (lower(name(sp)) == lower(s)) return sp;
    return std::nullopt;
}

Strategy species_strategy(SeedSpecies s) {
    return s == SeedSpecies::Defector1 || s == SeedSpecies::Defector2 ? Strategy::Defect : Strategy::Cooperate;
}

Polyomino generate(SeedSpecies s) {
    switch (s) {
    case SeedSpecies::Line3: return Polyomino({{0, 0}, {1, 0}, {2, 0}});
    case SeedSpecies::Corner3: return Polyomino({{0, 0}, {1, 0}, {0, 1}});
    case SeedSpecies::Line4: return Polyomino({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    case SeedSpecies::Corner4: return Polyomino({{0, 0}, {1, 0}, {2, 0}, {0, 1}});
    case SeedSpecies::Hat4: return Polyomino({{0, 0}, {1, 0}, {2, 0}, {1, 1}});
    case SeedSpecies::Turn4: return Polyomino({{0, 0}, {1, 0}, {1, 1}, {2, 1}});
    case SeedSpecies::Square4: return Polyomino({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    case SeedSpecies::Defector1: return Polyomino({{0, 0}});
    case SeedSpecies::Defector2: return Polyomino({{0, 0}, {1, 0}});
    }
    throw InvalidParams("unknown species");
}

// ---- family names

std::string name(DKind k) {
    switch (k) {
    case DKind::Stable: return "Stable";
    case DKind::DoublyEven: return "DoublyEven";
    case DKind::OppositeEven: return "OppositeEven";
    case DKind::AdjacentEven: return "AdjacentEven";
    case DKind::DoubleEvenTransit: return "DoubleEvenTransit";
    case DKind::AdjTransitA: return "AdjTransitA";
    case DKind::AdjTransitB: return "AdjTransitB";
    case DKind::AdjTransitC: return "AdjTransitC";
    }
    return "?";
}

std::optional<DKind> parse_dkind(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(DKind::AdjTransitC); ++i) {
        auto k = static_cast<DKind>(i);
        if (lower(name(k)) == lower(s)) return k;
    }
    auto l = lower(s);
    if (l == "adjtransita" || l == "transita") return DKind::AdjTransitA;
    if (l == "transitb") return DKind::AdjTransitB;
    if (l == "transitc") return DKind::AdjTransitC;
    if (l == "det" || l == "doubleeventransitshort") return DKind::DoubleEvenTransit;
    return std::nullopt;
}

int expected_weak_count(DKind k) {
    switch (k) {
    case DKind::Stable: return 0;
    case DKind::DoublyEven: return 8;
    case DKind::OppositeEven:
    case DKind::AdjacentEven: return 4;
    default: return 3;
    }
}

std::string DFamilyKind::str() const {
    std::string s = name(kind);
    if (kind == DKind::DoubleEvenTransit && short_side) s += "Short";
    s += "(" + std::to_string(w) + "," + std::to_string(h);
    if (is_transit()) s += "," + std::to_string(l);
    return s + ")";
}

std::string str(const ClusterKind& k) {
    if (auto d = std::get_if<DFamilyKind>(&k)) return d->str();
    return name(std::get<SeedSpecies>(k));
}

// ---- skew-rectangle geometry
//
// With u = x+y and v = x-y every basic cluster is the set of cells with
// u in [a,b], v in [c,d] (u, v of equal parity). A corner whose two
// coordinates share parity is a one-cell tip, otherwise a two-cell flat edge.

namespace {

struct Rect {
    int a, b, c, d;
};

bool same_parity(int p, int q) { return ((p - q) & 1) == 0; }

CellSet rect_cells(const Rect& r) {
    CellSet out;
    for (int u = r.a; u <= r.b; ++u)
        for (int v = r.c; v <= r.d; ++v)
            if (same_parity(u, v)) out.push_back({(u + v) / 2, (u - v) / 2});
    std::sort(out.begin(), out.end());
    return out;
}

Rect hull(const CellSet& cells) {
    Rect r{1 << 30, -(1 << 30), 1 << 30, -(1 << 30)};
    for (auto c : cells) {
        int u = c.x + c.y, v = c.x - c.y;
        r.a = std::min(r.a, u);
        r.b = std::max(r.b, u);
        r.c = std::min(r.c, v);
        r.d = std::max(r.d, v);
    }
    return r;
}

Rect tighten(const Rect& r) { return hull(rect_cells(r)); }

enum class Corner { L, T, B, R };   // (a,c) (b,c) (a,d) (b,d)

std::pair<int, int> corner_uv(const Rect& r, Corner k) {
    switch (k) {
    case Corner::L: return {r.a, r.c};
    case Corner::T: return {r.b, r.c};
    case Corner::B: return {r.a, r.d};
    case Corner::R: return {r.b, r.d};
    }
    return {0, 0};
}

bool is_flat(const Rect& r, Corner k) {
    auto [u, v] = corner_uv(r, k);
    return !same_parity(u, v);
}

enum class Side { UA, UB, VC, VD };
constexpr std::array kSides{Side::UA, Side::UB, Side::VC, Side::VD};

// the two corners of a side, in the order its outer line is listed
std::pair<Corner, Corner> side_corners(Side s) {
    switch (s) {
    case Side::UA: return {Corner::L, Corner::B};
    case Side::UB: return {Corner::T, Corner::R};
    case Side::VC: return {Corner::L, Corner::T};
    case Side::VD: return {Corner::B, Corner::R};
    }
    return {Corner::L, Corner::B};
}

// cells just outside side s, ordered from the first corner to the second
CellSet outer_line(const Rect& r, Side s) {
    CellSet out;
    auto push = [&](int u, int v) { out.push_back({(u + v) / 2, (u - v) / 2}); };
    switch (s) {
    case Side::UA:
        for (int v = r.c; v <= r.d; ++v)
            if (same_parity(r.a - 1, v)) push(r.a - 1, v);
        break;
    case Side::UB:
        for (int v = r.c; v <= r.d; ++v)
            if (same_parity(r.b + 1, v)) push(r.b + 1, v);
        break;
    case Side::VC:
        for (int u = r.a; u <= r.b; ++u)
            if (same_parity(u, r.c - 1)) push(u, r.c - 1);
        break;
    case Side::VD:
        for (int u = r.a; u <= r.b; ++u)
            if (same_parity(u, r.d + 1)) push(u, r.d + 1);
        break;
    }
    return out;
}

Rect shrink(const Rect& r, Side s) {
    switch (s) {
    case Side::UA: return tighten({r.a + 1, r.b, r.c, r.d});
    case Side::UB: return tighten({r.a, r.b - 1, r.c, r.d});
    case Side::VC: return tighten({r.a, r.b, r.c + 1, r.d});
    case Side::VD: return tighten({r.a, r.b, r.c, r.d - 1});
    }
    return r;
}

DKind rect_class(const Rect& r) {
    int flats = 0;
    for (auto k : {Corner::L, Corner::T, Corner::B, Corner::R}) flats += is_flat(r, k);
    if (flats == 0) return DKind::Stable;
    if (flats == 4) return DKind::DoublyEven;
    return is_flat(r, Corner::L) == is_flat(r, Corner::R) ? DKind::OppositeEven : DKind::AdjacentEven;
}

std::pair<int, int> rect_params(const Rect& r) {
    int p = std::min(r.b - r.a, r.d - r.c), q = std::max(r.b - r.a, r.d - r.c);
    switch (rect_class(r)) {
    case DKind::DoublyEven: return {(p + q) / 2, p + 1};
    case DKind::AdjacentEven: return {(p + q + 1) / 2, p + 1};
    default: return {(p + q) / 2 + 1, p + 1};
    }
}

// ---- column-by-column constructions; (height, bottom) per column

using Columns = std::vector<std::pair<int, int>>;

CellSet from_columns(const Columns& cs) {
    CellSet out;
    for (std::size_t i = 0; i < cs.size(); ++i)
        for (int y = 0; y < cs[i].first; ++y) out.push_back({static_cast<int>(i), cs[i].second + y});
    return normalized(std::move(out));
}

// previous column vertically centred in the next one
void grow_centred(Columns& cs, int upto) {
    while (cs.back().first < upto) {
        auto [ph, pb] = cs.back();
        cs.push_back({ph + 2, pb - 1});
    }
}

void shrink_to(Columns& cs, int downto) {
    while (cs.back().first > downto) {
        auto [ph, pb] = cs.back();
        cs.push_back({ph - 2, pb + 1});
    }
}

// a column of height h whose top meets the top of the previous column
void top_aligned(Columns& cs, int h) {
    auto [ph, pb] = cs.back();
    cs.push_back({h, pb + ph - h});
}

void descending_run(Columns& cs, int count) {
    for (int i = 0; i < count; ++i) cs.push_back({cs.back().first, cs.back().second - 1});
}

CellSet stable_cells(int w, int h) {
    Columns cs{{1, 0}};
    grow_centred(cs, h);
    descending_run(cs, w - h);
    shrink_to(cs, 1);
    return from_columns(cs);
}

CellSet doubly_cells(int w, int h) {
    Columns cs{{2, 0}};
    grow_centred(cs, h - 1);
    if (w == h - 1) {
        cs.push_back(cs.back());
    } else {
        top_aligned(cs, h);
        descending_run(cs, w - h);
        cs.push_back({h - 1, cs.back().second});
    }
    shrink_to(cs, 2);
    return from_columns(cs);
}

CellSet opposite_cells(int w, int h) {
    Columns cs{{1, 0}};
    grow_centred(cs, h - 1);
    if (w == h) {
        cs.push_back(cs.back());
    } else {
        top_aligned(cs, h);
        descending_run(cs, w - h - 1);
        cs.push_back({h - 1, cs.back().second});
    }
    shrink_to(cs, 1);
    return from_columns(cs);
}

// even h follows the written construction; odd h (needed for shapes such as
// the 8-column, height-7 cluster reached by the dynamics) has a single
// tallest run, top-aligned, and no h-1 column
CellSet adjacent_cells(int w, int h) {
    Columns cs{{2, 0}};
    if (h % 2 == 0) {
        grow_centred(cs, h);
        descending_run(cs, w - h);
        cs.push_back({h - 1, cs.back().second});
    } else {
        grow_centred(cs, h - 1);
        top_aligned(cs, h);
        descending_run(cs, w - h);
    }
    shrink_to(cs, 1);
    return from_columns(cs);
}

// base rectangle of a transit and where its partial layer goes
struct TransitPlan {
    Rect base;
    Side side;
    bool reversed;   // layer starts at the side's second corner
    int line_len;
    int other_len;   // line length on the perpendicular sides
};

int line_len(const Rect& r, Side s) { return static_cast<int>(outer_line(r, s).size()); }

Rect basic_rect(DKind k, int w, int h);

std::optional<TransitPlan> plan_transit(const DFamilyKind& k) {
    auto pick = [](const Rect& base, auto pred) -> std::optional<TransitPlan> {
        for (auto s : kSides) {
            auto [c1, c2] = side_corners(s);
            for (bool rev : {false, true}) {
                Corner st = rev ? c2 : c1, en = rev ? c1 : c2;
                if (pred(is_flat(base, st), is_flat(base, en), s)) {
                    Side perp = (s == Side::UA || s == Side::UB) ? Side::VC : Side::UA;
                    return TransitPlan{base, s, rev, line_len(base, s), line_len(base, perp)};
                }
            }
        }
        return std::nullopt;
    };
    switch (k.kind) {
    case DKind::AdjTransitA:
        return pick(basic_rect(DKind::AdjacentEven, k.w, k.h), [](bool f1, bool f2, Side) { return f1 && f2; });
    case DKind::AdjTransitB:
        return pick(basic_rect(DKind::AdjacentEven, k.w, k.h), [](bool f1, bool f2, Side) { return f1 && !f2; });
    case DKind::AdjTransitC: {
        Rect hl = basic_rect(DKind::AdjacentEven, k.w, k.h);
        for (auto s : kSides) {
            auto [c1, c2] = side_corners(s);
            if (is_flat(hl, c1) && is_flat(hl, c2)) {
                Rect base = shrink(hl, s);
                Side perp = (s == Side::UA || s == Side::UB) ? Side::VC : Side::UA;
                return TransitPlan{base, s, false, line_len(base, s), line_len(base, perp)};
            }
        }
        return std::nullopt;
    }
    case DKind::DoubleEvenTransit: {
        Rect base = basic_rect(DKind::OppositeEven, k.w, k.h);
        int along_u = line_len(base, Side::UA), along_v = line_len(base, Side::VC);
        int want = k.short_side ? std::min(along_u, along_v) : std::max(along_u, along_v);
        return pick(base, [&](bool f1, bool f2, Side s) {
            int len = (s == Side::UA || s == Side::UB) ? along_u : along_v;
            return f1 && !f2 && len == want;
        });
    }
    default: return std::nullopt;
    }
}

// ranges without the tie-break between equal shapes (see check_params)
std::optional<std::string> raw_check(const DFamilyKind& k) {
    const int w = k.w, h = k.h;
    switch (k.kind) {
    case DKind::Stable:
        if (h < 3 || h % 2 == 0 || w < h) return "Stable needs odd h >= 3 and w >= h";
        return std::nullopt;
    case DKind::DoublyEven:
        if (h < 3 || h % 2 == 0 || w < h - 1 || w < 3) return "DoublyEven needs odd h >= 3, w >= h-1 and w >= 3";
        return std::nullopt;
    case DKind::OppositeEven:
        if (h < 4 || h % 2 != 0 || w < h) return "OppositeEven needs even h >= 4 and w >= h";
        return std::nullopt;
    case DKind::AdjacentEven:
        if (h < 3 || w < h) return "AdjacentEven needs h >= 3 and w >= h";
        return std::nullopt;
    default: break;
    }
    DKind base = k.kind == DKind::DoubleEvenTransit ? DKind::OppositeEven : DKind::AdjacentEven;
    if (auto e = raw_check({base, w, h})) return *e;
    if (k.kind != DKind::DoubleEvenTransit && k.short_side) return "only the double even transit has a short-side variant";
    auto plan = plan_transit(k);
    if (!plan) return "no side matches this transit";
    if (k.kind == DKind::DoubleEvenTransit && k.short_side && plan->line_len == plan->other_len)
        return "square base: the short-side variant coincides with the long one";
    // with h = 3 the side between the flat corners holds two cells and the
    // first one already touches the far pair: two weak defectors, no transit
    if (k.kind == DKind::AdjTransitA && plan->line_len < 3) return "type A needs a side of at least three cells";
    int lo = k.kind == DKind::AdjTransitC ? 0 : 1;
    int hi = k.kind == DKind::AdjTransitC ? plan->line_len - 2 : plan->line_len - 1;
    if (k.l < lo || k.l > hi)
        return "length out of range [" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    return std::nullopt;
}

CellSet geometric(const DFamilyKind& k) {
    switch (k.kind) {
    case DKind::Stable: return stable_cells(k.w, k.h);
    case DKind::DoublyEven: return doubly_cells(k.w, k.h);
    case DKind::OppositeEven: return opposite_cells(k.w, k.h);
    case DKind::AdjacentEven: return adjacent_cells(k.w, k.h);
    default: break;
    }
    auto plan = *plan_transit(k);
    CellSet out = rect_cells(plan.base);
    CellSet line = outer_line(plan.base, plan.side);
    if (plan.reversed) std::reverse(line.begin(), line.end());
    int take = k.kind == DKind::AdjTransitC ? k.l + 1 : k.l;
    out.insert(out.end(), line.begin(), line.begin() + take);
    return normalized(std::move(out));
}

Rect basic_rect(DKind k, int w, int h) {
    DFamilyKind dk{k, w, h};
    return hull(geometric(dk));
}

}  // namespace

std::optional<std::string> check_params(const DFamilyKind& k) {
    if (auto e = raw_check(k)) return e;
    // a type-A layer one short of complete leaves a stable shape minus a tip,
    // which also reads as type A on the neighbouring side; keep the reading
    // the classifier picks
    if (k.kind == DKind::AdjTransitA) {
        auto plan = plan_transit(k);
        if (k.l == plan->line_len - 1) {
            auto c = classify(geometric(k));
            auto d = c ? std::get_if<DFamilyKind>(&*c) : nullptr;
            if (!d || !d->same_params(k)) return "alias of " + (d ? d->str() : std::string("?"));
        }
    }
    return std::nullopt;
}

std::vector<DFamilyKind> enumerate_kinds(int maxwh) {
    std::vector<DFamilyKind> out;
    for (int k = 0; k <= static_cast<int>(DKind::AdjTransitC); ++k)
        for (int w = 1; w <= maxwh; ++w)
            for (int h = 1; h <= maxwh; ++h)
                for (bool sh : {false, true}) {
                    DFamilyKind base{static_cast<DKind>(k), w, h, 0, sh};
                    if (!base.is_transit()) {
                        if (!sh && !check_params(base)) out.push_back(base);
                        continue;
                    }
                    for (int l = 0; l <= 2 * maxwh + 2; ++l) {
                        base.l = l;
                        if (!check_params(base)) out.push_back(base);
                    }
                }
    return out;
}

Polyomino generate(const DFamilyKind& k) {
    if (auto e = check_params(k)) throw InvalidParams(k.str() + ": " + *e);
    CellSet cells = geometric(k);
    if (k.symmetry) cells = transformed(cells, k.symmetry);
    return Polyomino(std::move(cells));
}

Polyomino generate_inductive(const DFamilyKind& k) {
    if (auto e = check_params(k)) throw InvalidParams(k.str() + ": " + *e);
    if (!k.is_transit()) return generate(k);
    const CheatAdvantage T;
    constexpr int margin = 3;
    // weak cells in the frame of s (s may reach negative coordinates)
    auto weak_cells = [&](const CellSet& s) {
        int mx = s[0].x, my = s[0].y;
        for (auto c : s) {
            mx = std::min(mx, c.x);
            my = std::min(my, c.y);
        }
        auto cfg = embed(normalized(s), Strategy::Defect, margin);
        CellSet out;
        for (int v : weak_set(cfg, T))
            out.push_back({cfg.topology().col(v) - margin + mx, cfg.topology().row(v) - margin + my});
        std::sort(out.begin(), out.end());
        return out;
    };
    auto isolated = [&](const CellSet& s) {
        auto w = weak_cells(s);
        CellSet out;
        for (auto c : w) {
            bool lone = true;
            for (auto [dx, dy] : kSteps) lone = lone && !contains(w, Cell{c.x + dx, c.y + dy});
            if (lone) out.push_back(c);
        }
        return out;
    };
    // keep adding the single isolated weak defector while there is one;
    // also reports the weak count where the chain stopped
    auto chain = [&](CellSet s, std::vector<Cell> seq, std::size_t limit) {
        std::sort(s.begin(), s.end());
        for (auto c : seq) s.insert(std::upper_bound(s.begin(), s.end(), c), c);
        while (seq.size() < limit) {
            auto iso = isolated(s);
            if (iso.size() != 1 || contains(s, iso[0])) break;
            seq.push_back(iso[0]);
            s.insert(std::upper_bound(s.begin(), s.end(), iso[0]), iso[0]);
        }
        return std::pair{seq, weak_cells(s).size()};
    };
    auto finish = [](CellSet s, const std::vector<Cell>& seq, int take) {
        s.insert(s.end(), seq.begin(), seq.begin() + take);
        return Polyomino(normalized(std::move(s)));
    };
    const std::size_t big = 4 * static_cast<std::size_t>(k.w + k.h) + 8;

    if (k.kind == DKind::AdjTransitC) {
        CellSet s = geometric({DKind::AdjTransitC, k.w, k.h, 0});
        auto [seq, stop] = chain(s, {}, static_cast<std::size_t>(k.l));
        if (static_cast<int>(seq.size()) < k.l) throw InvalidParams(k.str() + ": construction lost its isolated weak defector");
        return finish(s, seq, k.l);
    }

    // Start from every weak defector of the base and follow the layer as far
    // as it goes. A layer running into the other flat corner stops with three
    // weak defectors in a row (type A); one running into a corner that is not
    // flat stops with two separate pairs (type B, and the double even transit).
    DKind base_kind = k.kind == DKind::DoubleEvenTransit ? DKind::OppositeEven : DKind::AdjacentEven;
    CellSet base = geometric({base_kind, k.w, k.h});
    auto bw = weak_cells(base);
    std::vector<Polyomino> options;
    for (auto first : bw) {
        auto [seq, stop] = chain(base, {first}, big);
        bool ends_flat = stop == 3;
        if (static_cast<int>(seq.size()) < k.l) continue;
        if (k.kind == DKind::AdjTransitA && !ends_flat) continue;
        if (k.kind != DKind::AdjTransitA && ends_flat) continue;
        options.push_back(finish(base, seq, k.l));
    }
    if (options.empty()) throw InvalidParams(k.str() + ": no layer of this type");
    // several starts may fit; prefer the one the geometric construction uses
    // when they are not congruent
    auto want = dihedral_canonical(geometric(k)).first;
    for (auto& p : options)
        if (dihedral_canonical(p.cells()).first == want) return p;
    return options.front();
}

// ---- classification

namespace {

std::optional<SeedSpecies> match_seed(const CellSet& canon) {
    if (canon.size() > 4) return std::nullopt;
    for (auto sp : kAllSpecies)
        if (dihedral_canonical(generate(sp).cells()).first == canon) return sp;
    return std::nullopt;
}

std::optional<DFamilyKind> classify_family(const CellSet& cells) {
    Rect h = hull(cells);
    CellSet full = rect_cells(h);
    if (full.size() == cells.size()) {
        auto [w, hh] = rect_params(h);
        DFamilyKind k{rect_class(h), w, hh};
        if (raw_check(k)) return std::nullopt;
        return k;
    }
    std::vector<DFamilyKind> cands;
    for (auto s : kSides) {
        Rect base = shrink(h, s);
        CellSet line = outer_line(base, s);
        // everything off this line must be present, and the line itself must
        // be filled from one end
        CellSet rest;
        std::set_difference(cells.begin(), cells.end(), line.begin(), line.end(), std::back_inserter(rest));
        if (rest != rect_cells(base)) continue;
        std::vector<bool> in(line.size());
        int filled = 0;
        for (std::size_t i = 0; i < line.size(); ++i) filled += (in[i] = contains(cells, line[i]));
        if (filled == 0 || filled == static_cast<int>(line.size())) continue;
        auto [c1, c2] = side_corners(s);
        for (bool rev : {false, true}) {
            bool prefix = true;
            for (std::size_t i = 0; i < line.size(); ++i) {
                std::size_t j = rev ? line.size() - 1 - i : i;
                prefix = prefix && (in[j] == (static_cast<int>(i) < filled));
            }
            if (!prefix) continue;
            Corner st = rev ? c2 : c1, en = rev ? c1 : c2;
            auto [bw, bh] = rect_params(base);
            DKind bk = rect_class(base);
            DFamilyKind k;
            if (bk == DKind::Stable) {
                auto [hw, hh] = rect_params(h);
                k = {DKind::AdjTransitC, hw, hh, filled - 1};
            } else if (bk == DKind::AdjacentEven && is_flat(base, st)) {
                k = {is_flat(base, en) ? DKind::AdjTransitA : DKind::AdjTransitB, bw, bh, filled};
            } else if (bk == DKind::OppositeEven && is_flat(base, st)) {
                Side perp = (s == Side::UA || s == Side::UB) ? Side::VC : Side::UA;
                k = {DKind::DoubleEvenTransit, bw, bh, filled, line_len(base, s) < line_len(base, perp)};
            } else {
                continue;
            }
            if (!raw_check(k)) cands.push_back(k);
        }
    }
    if (cands.empty()) return std::nullopt;
    return *std::min_element(cands.begin(), cands.end(), [](const DFamilyKind& a, const DFamilyKind& b) {
        return std::tie(a.kind, a.w, a.h, a.l, a.short_side) < std::tie(b.kind, b.w, b.h, b.l, b.short_side);
    });
}

}  // namespace

std::optional<ClusterKind> classify(const CellSet& input) {
    if (input.empty()) return std::nullopt;
    CellSet cells = normalized(input);
    auto canon = dihedral_canonical(cells).first;
    if (auto sp = match_seed(canon)) return ClusterKind{*sp};
    auto k = classify_family(cells);
    if (!k) return std::nullopt;
    CellSet gen = geometric(*k);
    for (int s = 0; s < 8; ++s)
        if (transformed(gen, s) == cells) {
            k->symmetry = s;
            return ClusterKind{*k};
        }
    return std::nullopt;
}

// ---- embedding

Configuration embed(const CellSet& input, Strategy field, int margin) {
    if (margin < 2) throw InvalidParams("embedding margin must be at least 2");
    CellSet cells = normalized(input);
    int w = 0, h = 0;
    for (auto c : cells) {
        w = std::max(w, c.x + 1);
        h = std::max(h, c.y + 1);
    }
    auto topo = Topology::window(h + 2 * margin, w + 2 * margin);
    Configuration cfg(topo, field, field);
    for (auto c : cells) cfg.set(topo.index(c.y + margin, c.x + margin), opposite(field));
    return cfg;
}

CellSet cells_of(const Configuration& window) {
    CellSet out;
    const auto& t = window.topology();
    for (int v = 0; v < window.size(); ++v)
        if (window[v] != window.field()) out.push_back({t.col(v), t.row(v)});
    std::sort(out.begin(), out.end());
    return out;
}

bool is_convex(const CellSet& input) {
    CellSet cells = normalized(input);
    if (!is_connected(cells)) return false;
    std::map<Cell, int> idx;
    for (std::size_t i = 0; i < cells.size(); ++i) idx[cells[i]] = static_cast<int>(i);
    for (std::size_t s = 0; s < cells.size(); ++s) {
        std::vector<int> dist(cells.size(), -1);
        std::deque<int> q{static_cast<int>(s)};
        dist[s] = 0;
        while (!q.empty()) {
            int i = q.front();
            q.pop_front();
            for (auto [dx, dy] : kSteps) {
                auto it = idx.find({cells[static_cast<std::size_t>(i)].x + dx, cells[static_cast<std::size_t>(i)].y + dy});
                if (it != idx.end() && dist[static_cast<std::size_t>(it->second)] < 0) {
                    dist[static_cast<std::size_t>(it->second)] = dist[static_cast<std::size_t>(i)] + 1;
                    q.push_back(it->second);
                }
            }
        }
        for (std::size_t t = 0; t < cells.size(); ++t)
            if (dist[t] != std::abs(cells[s].x - cells[t].x) + std::abs(cells[s].y - cells[t].y)) return false;
    }
    return true;
}

}  // namespace pdl
