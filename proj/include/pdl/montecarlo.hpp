#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdl/clusters.hpp"
#include "pdl/core.hpp"
#include "pdl/engine.hpp"

namespace pdl {

// Each vertex cooperates independently with probability p.
Configuration random_config(const Topology& topo, double p, std::uint64_t seed);

// Trial seed from (master, p index, replicate): three rounds of splitmix64,
// so neighbouring indices land far apart and results do not depend on the
// order trials are scheduled in.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t p_index, std::uint64_t rep) noexcept;

struct SweepSpec {
    TopologyKind topology = TopologyKind::Torus;
    int n = 100;
    std::vector<double> p_values;
    int replicates = 1;
    std::uint64_t master_seed = 1;
    CheatAdvantage T;
    EngineLimits limits;

    void validate() const;   // throws InvalidParams
};

enum class RunStatus { Stable, Periodic, MaxRounds, Escaped, Error };
std::string_view to_string(RunStatus s);

struct RunRecord {
    double p = 0;
    int n = 0;
    int p_index = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double r_f = 0;
    std::int64_t rounds = 0;
    RunStatus status = RunStatus::Stable;
    std::string error;   // message when status is Error/Escaped
};

struct PSummary {
    double p = 0;
    int used = 0;        // stable runs, the only ones averaged
    double mean = 0;
    double std_error = 0;
    double min = 0, max = 0;
    std::map<RunStatus, int> tally;
};

struct SweepResult {
    std::vector<RunRecord> records;   // sorted by (p_index, rep)
    std::vector<PSummary> summary;    // one per p, in spec order
};

// threads = 0 means one per hardware core
SweepResult sweep(const SweepSpec& spec, unsigned threads = 0);
RunRecord run_trial(const SweepSpec& spec, int p_index, int rep);

std::string sweep_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_sweep_csv(std::string_view text);   // throws ParseError
std::vector<PSummary> summarize(const std::vector<RunRecord>& records);

enum class TheoryCurve { CycleLowerE, CycleUpperE, CycleLowerAAS, TorusSmall, TorusSmallUpper, TorusLarge, TorusFloor };
std::string name(TheoryCurve c);
std::optional<TheoryCurve> parse_curve(std::string_view s);
// n only matters for TorusSmallUpper; log is natural
double theory_curve(TheoryCurve c, double p, int n = 0);

// ---- cluster census

// connected cooperator components of the configuration, grouped by fixed
// shape (translation only); only components with at most max_size cells
std::map<CellSet, int> cluster_census(const Configuration& c, int max_size);
// cells outside the shape that touch it
int perimeter(const CellSet& cells);

// ---- containment

struct ContainmentResult {
    int trials = 0;
    int escapes = 0;
    int radius = 0;
    double fraction() const noexcept { return trials ? static_cast<double>(escapes) / trials : 0.0; }
};

// Runs the seed in its opposite field and reports how often some cell ever
// leaves the ball of radius 2i+4 (Manhattan distance to the nearest seed
// cell). margin < radius + 2 makes the window too small to tell, which is
// reported as EscapedWindow.
ContainmentResult containment_experiment(SeedSpecies species, int i, int trials, std::uint64_t seed,
                                         const CheatAdvantage& T = {}, std::optional<int> margin = std::nullopt);

}  // namespace pdl
