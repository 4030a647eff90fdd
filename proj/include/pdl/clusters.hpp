#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdl/core.hpp"

namespace pdl {

struct Cell {
    int x = 0;   // column
    int y = 0;   // row (grows "up" in the column-by-column constructions)
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Sorted cell list; not necessarily connected.
using CellSet = std::vector<Cell>;

CellSet normalized(CellSet cells);                       // sorted, min x = min y = 0
CellSet transformed(const CellSet& cells, int sym);     // one of 8 dihedral maps, then normalized
// smallest normalized image over the dihedral group, and which map produced it
std::pair<CellSet, int> dihedral_canonical(const CellSet& cells);
std::string encode(const CellSet& cells);               // "x,y;x,y;..." of the sorted set
bool is_connected(const CellSet& cells);

class Polyomino {
public:
    Polyomino() = default;
    explicit Polyomino(CellSet cells);   // normalizes; throws unless edge-connected and nonempty
    const CellSet& cells() const noexcept { return cells_; }
    int size() const noexcept { return static_cast<int>(cells_.size()); }
    int width() const noexcept;
    int height() const noexcept;
    friend auto operator<=>(const Polyomino&, const Polyomino&) = default;

private:
    CellSet cells_;
};

std::vector<Polyomino> enumerate_fixed_polyominoes(int k);

enum class SeedSpecies { Line3, Corner3, Line4, Corner4, Hat4, Turn4, Square4, Defector1, Defector2 };
std::string name(SeedSpecies s);
std::optional<SeedSpecies> parse_species(std::string_view s);
// strategy of the cells (the surrounding field is the opposite)
Strategy species_strategy(SeedSpecies s);

enum class DKind { Stable, DoublyEven, OppositeEven, AdjacentEven, DoubleEvenTransit, AdjTransitA, AdjTransitB, AdjTransitC };

struct DFamilyKind {
    DKind kind = DKind::Stable;
    int w = 0;
    int h = 0;
    int l = 0;
    // DoubleEvenTransit only: the layer runs along the shorter side of the base
    bool short_side = false;
    int symmetry = 0;   // dihedral map applied to the generated shape; not part of identity

    bool is_transit() const noexcept { return kind >= DKind::DoubleEvenTransit; }
    std::string str() const;
    bool same_params(const DFamilyKind& o) const noexcept {
        return kind == o.kind && w == o.w && h == o.h && l == o.l && short_side == o.short_side;
    }
};

std::string name(DKind k);
std::optional<DKind> parse_dkind(std::string_view s);   // accepts names and kebab-case
int expected_weak_count(DKind k);

using ClusterKind = std::variant<DFamilyKind, SeedSpecies>;
std::string str(const ClusterKind& k);

// Parameter validity; the message explains the violated constraint.
std::optional<std::string> check_params(const DFamilyKind& k);
// every valid parameter set with w,h <= maxwh
std::vector<DFamilyKind> enumerate_kinds(int maxwh);

Polyomino generate(const DFamilyKind& k);
Polyomino generate(SeedSpecies s);
// Transit built step by step through weak-set queries: base shape, then a
// weak defector of the base, then the isolated weak vertex repeatedly. The
// layer type is read off where the chain stops. When several starts fit,
// the one congruent to generate(k) is returned if there is one, so this
// cross-checks that the geometric shape is reachable by the process.
Polyomino generate_inductive(const DFamilyKind& k);

std::optional<ClusterKind> classify(const CellSet& cells);

Configuration embed(const CellSet& cells, Strategy field, int margin);
// cells differing from the field, in window coordinates (x = col, y = row)
CellSet cells_of(const Configuration& window);

bool is_convex(const CellSet& cells);

}  // namespace pdl
