#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdl/clusters.hpp"
#include "pdl/core.hpp"
#include "pdl/engine.hpp"

namespace pdl {

// Class of a basic configuration: the cells off the field strategy, up to
// translation and the dihedral group.
struct OutcomeClass {
    enum class Tag { Empty, Stable, Family, Seed, Unclassified };
    Tag tag = Tag::Empty;
    CellSet canonical;
    std::optional<ClusterKind> kind;

    int count() const noexcept { return static_cast<int>(canonical.size()); }
    std::string label() const;
    std::string sort_key() const;
    bool in_family() const noexcept { return tag == Tag::Family || (tag == Tag::Stable && kind.has_value()); }
    friend bool operator==(const OutcomeClass& a, const OutcomeClass& b) { return a.tag == b.tag && a.canonical == b.canonical; }
};

OutcomeClass classify_outcome(const CellSet& cells, bool stable);

struct TransitionDistribution {
    std::vector<std::pair<OutcomeClass, Rational>> outcomes;   // sorted by sort_key

    Rational total() const;
    Rational mass(const std::function<bool(const OutcomeClass&)>& pred) const;
    Rational mass_of(const std::string& label) const;
    std::string tsv() const;   // "<class>\t<num>/<den>" lines
};

struct ExactOptions {
    CheatAdvantage T;
    int threshold = kEnumerationThreshold;
    int max_forced_depth = 256;
};

// successors of a single round with their probabilities (merged per
// distinct configuration)
std::vector<std::pair<Configuration, Rational>> round_distribution(const Configuration& config,
                                                                   const ExactOptions& opt = {});

TransitionDistribution basic_step_distribution(const Configuration& config, const ExactOptions& opt = {});

// Cluster-level engine with a memo; states are dihedral-canonical cell sets
// in a fixed field. Re-embeds after every round so the window never limits
// growth.
class ClusterChain {
public:
    explicit ClusterChain(Strategy field = Strategy::Defect, ExactOptions opt = {});

    using Dist = std::vector<std::pair<CellSet, Rational>>;
    bool is_stable(const CellSet& canonical) const;
    const Dist& basic_step(const CellSet& canonical);
    CellSet collapse(const CellSet& cells, int* steps = nullptr) const;
    Rational stable_within(const CellSet& canonical, int steps);   // P(weak set empty within `steps` basic steps)
    std::size_t cached() const noexcept { return memo_.size(); }

private:
    Strategy field_;
    ExactOptions opt_;
    std::map<CellSet, Dist> memo_;
    std::map<std::pair<CellSet, int>, Rational> within_;
};

CellSet seed_cells(const ClusterKind& k);
Strategy seed_field(const ClusterKind& k);

struct AbsorptionStep {
    int step = 0;
    Rational mass_stable, mass_empty, mass_live;
};

struct AbsorptionReport {
    std::vector<AbsorptionStep> per_step;
    std::map<int, Rational> stable_sizes;   // absorbed stable mass by cooperator count
    Rational expected_cooperators_upper;
};

AbsorptionReport absorption(const ClusterKind& seed, int max_basic_steps, const ExactOptions& opt = {});

struct StableTimeResult {
    Rational minimum;
    DFamilyKind argmin;
    int checked = 0;
    std::vector<std::pair<DFamilyKind, Rational>> per_kind;
};

StableTimeResult verify_stable_time(const std::vector<DFamilyKind>& kinds, const ExactOptions& opt = {});

// sum over j = 1..jmax of (7/8)^j (1/8) ((6j+8)^2 + (6j+7)^2)
Rational clusterbound_series(int jmax);
Rational clusterbound_limit();              // closed form of the infinite sum
Rational clusterbound_tail_bound(int jmax);  // upper bound on the terms past jmax

}  // namespace pdl
