#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pdl/core.hpp"

namespace pdl {

// mt19937_64 plus our own bounded draws: the std distributions are not
// specified bit-for-bit across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next() { return gen_(); }
    std::uint64_t below(std::uint64_t n);   // uniform in [0, n)
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct Permutation {
    std::vector<int> order;
    int position(int v) const;   // sigma^-1
};

struct RoundTrace {
    std::vector<int> weak_before;   // sorted
    Permutation order;
    std::vector<bool> flipped;      // per subround
    int flips() const;
};

struct TerminationStatus {
    enum class Kind { Stable, Periodic, MaxRoundsExceeded };
    Kind kind = Kind::Stable;
    std::int64_t at_round = 0;       // Stable
    std::int64_t start_round = 0;    // Periodic
    std::int64_t period = 0;
    std::string str() const;
};

struct EngineLimits {
    std::int64_t max_rounds = 1'000'000;
    int max_forced_depth = 256;
    int escape_margin = 2;
};

// A configuration plus incrementally maintained cooperator-neighbour counts
// and weak flags. One instance per run; copying is cheap enough for windows.
class Process {
public:
    Process(Configuration c, CheatAdvantage T);

    const Configuration& config() const noexcept { return cfg_; }
    const CheatAdvantage& T() const noexcept { return T_; }
    bool stable() const noexcept { return weak_list_.empty(); }
    std::vector<int> weak_set() const;   // sorted
    std::size_t weak_count() const noexcept { return weak_list_.size(); }
    int coop_count(int v) const noexcept { return coop_[static_cast<std::size_t>(v)]; }
    std::pair<std::uint64_t, std::uint64_t> hash() const noexcept { return {h1_, h2_}; }

    // weakness against the current counts, ignoring the cached flags
    bool weak_now(int v) const;

    RoundTrace apply_round(const Permutation& perm);
    RoundTrace step(Rng& rng);
    // undo a round produced by apply_round on this process
    void revert(const RoundTrace& trace);

    // raw strategy toggle (no weakness check); call settle() before using
    // weak_set() again
    void toggle(int v);
    void settle();

private:
    void mark_dirty(int v);
    void set_weak(int v, bool w);

    Configuration cfg_;
    CheatAdvantage T_;
    std::vector<std::uint8_t> coop_;
    std::vector<std::int32_t> weak_pos_;   // index into weak_list_ or -1
    std::vector<int> weak_list_;
    std::vector<std::uint8_t> dirty_flag_;
    std::vector<int> dirty_;
    std::uint64_t h1_ = 0, h2_ = 0;
};

RoundTrace apply_round(Configuration& config, const Permutation& perm, const CheatAdvantage& T);
RoundTrace step_random(Configuration& config, Rng& rng, const CheatAdvantage& T);

struct RunResult {
    Configuration final;
    TerminationStatus status;
    std::int64_t rounds = 0;
    Rational final_density;
};

using RoundObserver = std::function<void(const Process&, const RoundTrace&, std::int64_t round)>;

RunResult run_to_termination(Configuration config, Rng& rng, const CheatAdvantage& T,
                             const EngineLimits& limits, const RoundObserver& observer = {});

// Full recompute of every count after every subround of trace, compared
// against what the incremental process maintained.
bool recompute_vs_incremental(const Configuration& before, const RoundTrace& trace, const CheatAdvantage& T);

// ---- forced rounds

enum class ForcedMode { Exact, Sufficient, Auto };
enum class Forcedness { Forced, NotForced, Unknown };

constexpr int kEnumerationThreshold = 9;

// One distinct successor of a round: which weak vertices flipped, and how
// many of the |W|! orders produce it.
struct RoundOutcome {
    std::vector<int> flipped;
    std::uint64_t orders = 0;
};

// Dynamic programme over (processed set, flipped set); identical result to
// walking all |W|! orders but far cheaper when flips commute.
std::vector<RoundOutcome> enumerate_round(const Configuration& config, const CheatAdvantage& T,
                                          int threshold = kEnumerationThreshold);
// Reference implementation: every permutation, one by one.
std::vector<RoundOutcome> enumerate_round_bruteforce(const Configuration& config, const CheatAdvantage& T,
                                                     int threshold = kEnumerationThreshold);

Forcedness is_forced(const Configuration& config, const CheatAdvantage& T, ForcedMode mode = ForcedMode::Auto,
                     int threshold = kEnumerationThreshold);

// Applies forced rounds until a choiceful or stable configuration.
std::pair<Configuration, int> collapse_forced(Configuration config, const CheatAdvantage& T, int max_depth);

}  // namespace pdl
