#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace pdl {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

std::string to_string(const Rational& r);   // "num/den", or "num" when den == 1
Rational parse_rational(std::string_view s);

// error hierarchy; every failure the library reports derives from Error
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnresolvedTie : Error { using Error::Error; };
struct PermMismatch : Error { using Error::Error; };
struct EscapedWindow : Error { using Error::Error; };
struct ThresholdExceeded : Error { using Error::Error; };
struct DepthExceeded : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

enum class Strategy : std::uint8_t { Defect = 0, Cooperate = 1 };

constexpr Strategy opposite(Strategy s) noexcept {
    return s == Strategy::Defect ? Strategy::Cooperate : Strategy::Defect;
}
constexpr bool is_coop(Strategy s) noexcept { return s == Strategy::Cooperate; }
char to_char(Strategy s);

// Payoff a defector gets from a cooperator. Kept as a small exact fraction so
// score comparisons reduce to integer cross-multiplication.
class CheatAdvantage {
public:
    CheatAdvantage() = default;
    CheatAdvantage(std::int64_t num, std::int64_t den);
    static CheatAdvantage parse(std::string_view s);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    Rational value() const { return Rational(num_, den_); }
    // 1 < T < 4/3: ties between roles are impossible on degree <= 4
    bool main_regime() const noexcept { return 3 * num_ < 4 * den_; }
    std::string str() const;

    friend bool operator==(const CheatAdvantage&, const CheatAdvantage&) = default;

private:
    std::int64_t num_ = 7;
    std::int64_t den_ = 6;
};

Rational payoff(Strategy a, Strategy b, const CheatAdvantage& T);

// Score of a vertex together with its role. Ordered by value, defector first
// on exact ties (only reachable outside the main regime).
struct ScoreRank {
    Strategy role = Strategy::Defect;
    int coop_neighbors = 0;

    Rational value(const CheatAdvantage& T) const;
    // value scaled by T.den so it is an integer
    std::int64_t key(const CheatAdvantage& T) const noexcept {
        return role == Strategy::Defect ? coop_neighbors * T.num() : coop_neighbors * T.den();
    }
};

// <0, 0, >0 like strcmp
int compare(const ScoreRank& a, const ScoreRank& b, const CheatAdvantage& T) noexcept;

enum class TopologyKind { Cycle, Torus, Window };

class Topology {
public:
    static Topology cycle(int n);
    static Topology torus(int n);
    static Topology window(int rows, int cols);

    TopologyKind kind() const noexcept { return kind_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int vertex_count() const noexcept { return rows_ * cols_; }
    int degree() const noexcept { return kind_ == TopologyKind::Cycle ? 2 : 4; }
    int index(int r, int c) const noexcept { return r * cols_ + c; }
    int row(int v) const noexcept { return v / cols_; }
    int col(int v) const noexcept { return v % cols_; }

    // Fills out[0..degree) with neighbour ids; -1 marks an exterior cell of a
    // window (reads as the field strategy).
    void neighbors(int v, std::array<int, 4>& out) const noexcept;
    int distance(int a, int b) const noexcept;   // graph distance, windows ignore the exterior

    friend bool operator==(const Topology&, const Topology&) = default;

private:
    TopologyKind kind_ = TopologyKind::Torus;
    int rows_ = 0;
    int cols_ = 0;
};

class Configuration {
public:
    Configuration() = default;
    Configuration(Topology topo, Strategy fill, Strategy field = Strategy::Defect);
    Configuration(Topology topo, std::vector<Strategy> cells, Strategy field = Strategy::Defect);

    const Topology& topology() const noexcept { return topo_; }
    Strategy field() const noexcept { return field_; }
    int size() const noexcept { return static_cast<int>(cells_.size()); }
    Strategy at(int v) const { return cells_.at(static_cast<std::size_t>(v)); }
    Strategy operator[](int v) const noexcept { return cells_[static_cast<std::size_t>(v)]; }
    void set(int v, Strategy s) { cells_.at(static_cast<std::size_t>(v)) = s; }
    void flip(int v) { cells_.at(static_cast<std::size_t>(v)) = opposite(cells_[static_cast<std::size_t>(v)]); }
    std::span<const Strategy> cells() const noexcept { return cells_; }

    Strategy read(int nb) const noexcept { return nb < 0 ? field_ : cells_[static_cast<std::size_t>(nb)]; }
    int coop_neighbors(int v) const noexcept;
    // strategies of N[v] for an exterior neighbour of v; see core.cpp
    int exterior_coop_neighbors(int v) const noexcept;
    int cooperators() const noexcept;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    Topology topo_;
    std::vector<Strategy> cells_;
    Strategy field_ = Strategy::Defect;
};

ScoreRank score(const Configuration& c, int v, const CheatAdvantage& T);
bool is_weak(const Configuration& c, int v, const CheatAdvantage& T);
std::vector<int> weak_set(const Configuration& c, const CheatAdvantage& T);
Rational density(const Configuration& c);

// Fixture text: header `topology=<cycle|torus|window> field=<C|D|->` then rows.
std::string to_fixture(const Configuration& c);
Configuration parse_fixture(std::string_view text);

}  // namespace pdl
