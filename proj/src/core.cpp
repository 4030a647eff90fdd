#include "pdl/core.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace pdl {

std::string to_string(const Rational& r) {
    auto n = boost::multiprecision::numerator(r);
    auto d = boost::multiprecision::denominator(r);
    if (d == 1) return n.str();
    return n.str() + "/" + d.str();
}

Rational parse_rational(std::string_view s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string_view::npos) {
            auto dot = s.find('.');
            if (dot == std::string_view::npos) return Rational(BigInt(std::string(s)));
            // decimal literal, exact
            std::string digits(s.substr(0, dot));
            std::string frac(s.substr(dot + 1));
            BigInt den = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
            bool neg = !digits.empty() && digits[0] == '-';
            BigInt whole = digits.empty() || digits == "-" ? BigInt(0) : BigInt(digits);
            BigInt f = frac.empty() ? BigInt(0) : BigInt(frac);
            if (neg) f = -f;
            return Rational(whole) + Rational(f, den);
        }
        return Rational(BigInt(std::string(s.substr(0, slash))), BigInt(std::string(s.substr(slash + 1))));
    } catch (const std::exception&) {
        throw ParseError("bad rational: " + std::string(s));
    }
}

char to_char(Strategy s) { return is_coop(s) ? 'C' : 'D'; }

CheatAdvantage::CheatAdvantage(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num <= 0) throw InvalidParams("T must be a positive fraction");
    auto g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
    if (num_ <= den_) throw InvalidParams("T must exceed 1");
}

CheatAdvantage CheatAdvantage::parse(std::string_view s) {
    Rational r = parse_rational(s);
    auto n = boost::multiprecision::numerator(r);
    auto d = boost::multiprecision::denominator(r);
    if (n > 1'000'000'000 || d > 1'000'000'000) throw InvalidParams("T has too large a representation");
    return {n.convert_to<std::int64_t>(), d.convert_to<std::int64_t>()};
}

std::string CheatAdvantage::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

Rational payoff(Strategy a, Strategy b, const CheatAdvantage& T) {
    if (!is_coop(b)) return 0;
    return is_coop(a) ? Rational(1) : T.value();
}

Rational ScoreRank::value(const CheatAdvantage& T) const {
    return role == Strategy::Defect ? T.value() * coop_neighbors : Rational(coop_neighbors);
}

int compare(const ScoreRank& a, const ScoreRank& b, const CheatAdvantage& T) noexcept {
    auto ka = a.key(T), kb = b.key(T);
    if (ka != kb) return ka < kb ? -1 : 1;
    if (a.role != b.role) return a.role == Strategy::Defect ? 1 : -1;
    return 0;
}

// ---- topology

Topology Topology::cycle(int n) {
    if (n < 3) throw InvalidParams("cycle needs n >= 3");
    Topology t;
    t.kind_ = TopologyKind::Cycle;
    t.rows_ = 1;
    t.cols_ = n;
    return t;
}

Topology Topology::torus(int n) {
    if (n < 3) throw InvalidParams("torus needs n >= 3");
    Topology t;
    t.kind_ = TopologyKind::Torus;
    t.rows_ = n;
    t.cols_ = n;
    return t;
}

Topology Topology::window(int rows, int cols) {
    if (rows < 1 || cols < 1) throw InvalidParams("window needs positive extent");
    Topology t;
    t.kind_ = TopologyKind::Window;
    t.rows_ = rows;
    t.cols_ = cols;
    return t;
}

void Topology::neighbors(int v, std::array<int, 4>& out) const noexcept {
    int r = v / cols_, c = v % cols_;
    switch (kind_) {
    case TopologyKind::Cycle:
        out[0] = c == 0 ? cols_ - 1 : c - 1;
        out[1] = c == cols_ - 1 ? 0 : c + 1;
        return;
    case TopologyKind::Torus:
        out[0] = (r == 0 ? rows_ - 1 : r - 1) * cols_ + c;
        out[1] = (r == rows_ - 1 ? 0 : r + 1) * cols_ + c;
        out[2] = r * cols_ + (c == 0 ? cols_ - 1 : c - 1);
        out[3] = r * cols_ + (c == cols_ - 1 ? 0 : c + 1);
        return;
    case TopologyKind::Window:
        out[0] = r == 0 ? -1 : v - cols_;
        out[1] = r == rows_ - 1 ? -1 : v + cols_;
        out[2] = c == 0 ? -1 : v - 1;
        out[3] = c == cols_ - 1 ? -1 : v + 1;
        return;
    }
}

int Topology::distance(int a, int b) const noexcept {
    int dr = std::abs(row(a) - row(b)), dc = std::abs(col(a) - col(b));
    if (kind_ != TopologyKind::Window) {
        dr = std::min(dr, rows_ - dr);
        dc = std::min(dc, cols_ - dc);
    }
    return dr + dc;
}

// ---- configuration

Configuration::Configuration(Topology topo, Strategy fill, Strategy field)
    : topo_(topo), cells_(static_cast<std::size_t>(topo.vertex_count()), fill), field_(field) {}

Configuration::Configuration(Topology topo, std::vector<Strategy> cells, Strategy field)
    : topo_(topo), cells_(std::move(cells)), field_(field) {
    if (static_cast<int>(cells_.size()) != topo_.vertex_count())
        throw InvalidParams("strategy array does not match topology");
}

int Configuration::coop_neighbors(int v) const noexcept {
    std::array<int, 4> nb;
    topo_.neighbors(v, nb);
    int k = 0;
    for (int i = 0; i < topo_.degree(); ++i) k += is_coop(read(nb[i]));
    return k;
}

// An exterior cell next to interior v touches only v inside the window
// (diagonal exterior cells are not adjacent to the interior), so its other
// three neighbours read as field.
int Configuration::exterior_coop_neighbors(int v) const noexcept {
    return 3 * static_cast<int>(is_coop(field_)) + static_cast<int>(is_coop(cells_[static_cast<std::size_t>(v)]));
}

int Configuration::cooperators() const noexcept {
    return static_cast<int>(std::count(cells_.begin(), cells_.end(), Strategy::Cooperate));
}

ScoreRank score(const Configuration& c, int v, const CheatAdvantage&) {
    if (v < 0 || v >= c.size()) throw InvalidParams("vertex out of range");
    return {c[v], c.coop_neighbors(v)};
}

bool is_weak(const Configuration& c, int v, const CheatAdvantage& T) {
    std::array<int, 4> nb;
    c.topology().neighbors(v, nb);
    ScoreRank best = score(c, v, T);
    bool mixed = false;
    for (int i = 0; i < c.topology().degree(); ++i) {
        ScoreRank s = nb[i] < 0 ? ScoreRank{c.field(), c.exterior_coop_neighbors(v)} : score(c, nb[i], T);
        auto ks = s.key(T), kb = best.key(T);
        if (ks > kb) {
            best = s;
            mixed = false;
        } else if (ks == kb && s.role != best.role) {
            mixed = true;
        }
    }
    if (mixed) throw UnresolvedTie("maximum score in a closed neighbourhood is shared by both strategies");
    return best.role != c[v];
}

std::vector<int> weak_set(const Configuration& c, const CheatAdvantage& T) {
    std::vector<int> w;
    for (int v = 0; v < c.size(); ++v)
        if (is_weak(c, v, T)) w.push_back(v);
    return w;
}

Rational density(const Configuration& c) { return Rational(c.cooperators(), c.size()); }

// ---- fixtures

std::string to_fixture(const Configuration& c) {
    std::ostringstream os;
    const auto& t = c.topology();
    const char* kind = t.kind() == TopologyKind::Cycle ? "cycle" : t.kind() == TopologyKind::Torus ? "torus" : "window";
    char field = t.kind() == TopologyKind::Window ? to_char(c.field()) : '-';
    os << "topology=" << kind << " field=" << field << '\n';
    for (int r = 0; r < t.rows(); ++r) {
        for (int col = 0; col < t.cols(); ++col) os << to_char(c[t.index(r, col)]);
        os << '\n';
    }
    return os.str();
}

Configuration parse_fixture(std::string_view text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    if (lines.empty()) throw ParseError("empty fixture");

    std::string kind, field;
    std::istringstream hs(lines[0]);
    std::string tok;
    while (hs >> tok) {
        if (tok.rfind("topology=", 0) == 0) kind = tok.substr(9);
        else if (tok.rfind("field=", 0) == 0) field = tok.substr(6);
        else throw ParseError("unknown header token: " + tok);
    }
    std::vector<std::string> rows(lines.begin() + 1, lines.end());
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty()) throw ParseError("fixture has no rows");
    for (auto& r : rows)
        if (r.size() != rows[0].size()) throw ParseError("ragged fixture rows");
    int nr = static_cast<int>(rows.size()), nc = static_cast<int>(rows[0].size());

    Topology topo;
    Strategy fs = Strategy::Defect;
    if (kind == "cycle") {
        if (nr != 1) throw ParseError("cycle fixture must be one row");
        topo = Topology::cycle(nc);
    } else if (kind == "torus") {
        if (nr != nc) throw ParseError("torus fixture must be square");
        topo = Topology::torus(nr);
    } else if (kind == "window") {
        topo = Topology::window(nr, nc);
        if (field == "C") fs = Strategy::Cooperate;
        else if (field != "D") throw ParseError("window fixture needs field=C or field=D");
    } else {
        throw ParseError("unknown topology: " + kind);
    }
    if (kind != "window" && field != "-") throw ParseError("field must be '-' for " + kind);

    std::vector<Strategy> cells;
    cells.reserve(static_cast<std::size_t>(nr * nc));
    for (auto& r : rows)
        for (char ch : r) {
            if (ch == 'C') cells.push_back(Strategy::Cooperate);
            else if (ch == 'D') cells.push_back(Strategy::Defect);
            else throw ParseError(std::string("bad cell character: ") + ch);
        }
    return {topo, std::move(cells), fs};
}

}  // namespace pdl
