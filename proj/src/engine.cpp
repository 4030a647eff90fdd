#include "pdl/engine.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace pdl {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    // rejection on the top of the range keeps it exactly uniform
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t x;
    do x = gen_();
    while (x >= limit);
    return x % n;
}

int Permutation::position(int v) const {
    auto it = std::find(order.begin(), order.end(), v);
    return it == order.end() ? -1 : static_cast<int>(it - order.begin());
}

int RoundTrace::flips() const { return static_cast<int>(std::count(flipped.begin(), flipped.end(), true)); }

std::string TerminationStatus::str() const {
    switch (kind) {
    case Kind::Stable: return "stable";
    case Kind::Periodic: return "periodic";
    case Kind::MaxRoundsExceeded: return "maxrounds";
    }
    return "?";
}

// ---- Process

namespace {
std::uint64_t zobrist(int v, std::uint64_t salt) { return splitmix64(static_cast<std::uint64_t>(v) * 0x2545f4914f6cdd1dULL ^ salt); }
constexpr std::uint64_t kSaltA = 0x6a09e667f3bcc908ULL;
constexpr std::uint64_t kSaltB = 0xbb67ae8584caa73bULL;
}  // namespace

Process::Process(Configuration c, CheatAdvantage T) : cfg_(std::move(c)), T_(T) {
    auto n = static_cast<std::size_t>(cfg_.size());
    coop_.resize(n);
    weak_pos_.assign(n, -1);
    dirty_flag_.assign(n, 0);
    for (int v = 0; v < cfg_.size(); ++v) {
        coop_[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(cfg_.coop_neighbors(v));
        if (is_coop(cfg_[v])) {
            h1_ ^= zobrist(v, kSaltA);
            h2_ ^= zobrist(v, kSaltB);
        }
    }
    for (int v = 0; v < cfg_.size(); ++v)
        if (weak_now(v)) set_weak(v, true);
}

bool Process::weak_now(int v) const {
    const auto& topo = cfg_.topology();
    std::array<int, 4> nb;
    topo.neighbors(v, nb);
    Strategy own = cfg_[v];
    auto key = [&](Strategy role, int k) { return role == Strategy::Defect ? k * T_.num() : k * T_.den(); };
    Strategy best_role = own;
    std::int64_t best = key(own, coop_[static_cast<std::size_t>(v)]);
    bool mixed = false;
    for (int i = 0; i < topo.degree(); ++i) {
        Strategy r;
        int k;
        if (nb[i] < 0) {
            r = cfg_.field();
            k = 3 * static_cast<int>(is_coop(r)) + static_cast<int>(is_coop(own));
        } else {
            r = cfg_[nb[i]];
            k = coop_[static_cast<std::size_t>(nb[i])];
        }
        auto kk = key(r, k);
        if (kk > best) {
            best = kk;
            best_role = r;
            mixed = false;
        } else if (kk == best && r != best_role) {
            mixed = true;
        }
    }
    if (mixed) throw UnresolvedTie("maximum score in a closed neighbourhood is shared by both strategies");
    return best_role != own;
}

std::vector<int> Process::weak_set() const {
    std::vector<int> w = weak_list_;
    std::sort(w.begin(), w.end());
    return w;
}

void Process::set_weak(int v, bool w) {
    auto& pos = weak_pos_[static_cast<std::size_t>(v)];
    if (w && pos < 0) {
        pos = static_cast<std::int32_t>(weak_list_.size());
        weak_list_.push_back(v);
    } else if (!w && pos >= 0) {
        int last = weak_list_.back();
        weak_list_[static_cast<std::size_t>(pos)] = last;
        weak_pos_[static_cast<std::size_t>(last)] = pos;
        weak_list_.pop_back();
        pos = -1;
    }
}

void Process::mark_dirty(int v) {
    const auto& topo = cfg_.topology();
    auto touch = [&](int u) {
        if (u >= 0 && !dirty_flag_[static_cast<std::size_t>(u)]) {
            dirty_flag_[static_cast<std::size_t>(u)] = 1;
            dirty_.push_back(u);
        }
    };
    touch(v);
    std::array<int, 4> nb, nb2;
    topo.neighbors(v, nb);
    for (int i = 0; i < topo.degree(); ++i) {
        if (nb[i] < 0) continue;
        touch(nb[i]);
        topo.neighbors(nb[i], nb2);
        for (int j = 0; j < topo.degree(); ++j) touch(nb2[j]);
    }
}

void Process::toggle(int v) {
    cfg_.flip(v);
    int d = is_coop(cfg_[v]) ? 1 : -1;
    const auto& topo = cfg_.topology();
    std::array<int, 4> nb;
    topo.neighbors(v, nb);
    for (int i = 0; i < topo.degree(); ++i)
        if (nb[i] >= 0) coop_[static_cast<std::size_t>(nb[i])] = static_cast<std::uint8_t>(coop_[static_cast<std::size_t>(nb[i])] + d);
    h1_ ^= zobrist(v, kSaltA);
    h2_ ^= zobrist(v, kSaltB);
    mark_dirty(v);
}

void Process::settle() {
    for (int u : dirty_) {
        dirty_flag_[static_cast<std::size_t>(u)] = 0;
        set_weak(u, weak_now(u));
    }
    dirty_.clear();
}

RoundTrace Process::apply_round(const Permutation& perm) {
    RoundTrace tr;
    tr.weak_before = weak_set();
    std::vector<int> sorted = perm.order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != tr.weak_before) throw PermMismatch("permutation does not match the weak set");
    tr.order = perm;
    tr.flipped.resize(perm.order.size());
    for (std::size_t k = 0; k < perm.order.size(); ++k) {
        int v = perm.order[k];
        if (weak_now(v)) {
            toggle(v);
            tr.flipped[k] = true;
        }
    }
    settle();
    return tr;
}

RoundTrace Process::step(Rng& rng) {
    Permutation p{weak_set()};
    // Fisher-Yates
    for (std::size_t i = p.order.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(p.order[i - 1], p.order[j]);
    }
    return apply_round(p);
}

void Process::revert(const RoundTrace& trace) {
    for (std::size_t k = trace.order.order.size(); k-- > 0;)
        if (trace.flipped[k]) toggle(trace.order.order[k]);
    settle();
}

RoundTrace apply_round(Configuration& config, const Permutation& perm, const CheatAdvantage& T) {
    Process p(config, T);
    auto tr = p.apply_round(perm);
    config = p.config();
    return tr;
}

RoundTrace step_random(Configuration& config, Rng& rng, const CheatAdvantage& T) {
    Process p(config, T);
    auto tr = p.step(rng);
    config = p.config();
    return tr;
}

// ---- runs

namespace {

std::vector<std::uint64_t> pack(const Configuration& c) {
    std::vector<std::uint64_t> bits((static_cast<std::size_t>(c.size()) + 63) / 64);
    for (int v = 0; v < c.size(); ++v)
        if (is_coop(c[v])) bits[static_cast<std::size_t>(v) / 64] |= 1ULL << (v % 64);
    return bits;
}

struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
        return static_cast<std::size_t>(p.first ^ (p.second * 0x9e3779b97f4a7c15ULL));
    }
};

void check_window(const Configuration& c, const std::vector<int>& cells, int margin) {
    const auto& t = c.topology();
    if (t.kind() != TopologyKind::Window) return;
    for (int v : cells) {
        if (c[v] == c.field()) continue;
        int r = t.row(v), col = t.col(v);
        int d = std::min({r, col, t.rows() - 1 - r, t.cols() - 1 - col});
        if (d < margin) throw EscapedWindow("cluster reached the window boundary margin");
    }
}

}  // namespace

RunResult run_to_termination(Configuration config, Rng& rng, const CheatAdvantage& T, const EngineLimits& limits,
                             const RoundObserver& observer) {
    {
        std::vector<int> all(static_cast<std::size_t>(config.size()));
        std::iota(all.begin(), all.end(), 0);
        check_window(config, all, limits.escape_margin);
    }
    Process proc(std::move(config), T);
    struct Seen {
        std::int64_t round;
        std::vector<std::uint64_t> bits;
    };
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::vector<Seen>, PairHash> seen;
    seen[proc.hash()].push_back({0, pack(proc.config())});

    RunResult res;
    std::int64_t t = 0;
    while (true) {
        if (proc.stable()) {
            res.status.kind = TerminationStatus::Kind::Stable;
            res.status.at_round = t;
            break;
        }
        if (t >= limits.max_rounds) {
            res.status.kind = TerminationStatus::Kind::MaxRoundsExceeded;
            break;
        }
        auto tr = proc.step(rng);
        ++t;
        check_window(proc.config(), tr.order.order, limits.escape_margin);
        if (observer) observer(proc, tr, t);

        auto& bucket = seen[proc.hash()];
        auto bits = pack(proc.config());
        auto hit = std::find_if(bucket.begin(), bucket.end(), [&](const Seen& s) { return s.bits == bits; });
        if (hit != bucket.end() && !proc.stable()) {
            res.status.kind = TerminationStatus::Kind::Periodic;
            res.status.start_round = hit->round;
            res.status.period = t - hit->round;
            break;
        }
        bucket.push_back({t, std::move(bits)});
    }
    res.rounds = t;
    res.final_density = density(proc.config());
    res.final = proc.config();
    return res;
}

bool recompute_vs_incremental(const Configuration& before, const RoundTrace& trace, const CheatAdvantage& T) {
    if (trace.order.order.empty()) return true;
    Process inc(before, T);
    Configuration full = before;
    for (std::size_t k = 0; k < trace.order.order.size(); ++k) {
        int v = trace.order.order[k];
        bool w = inc.weak_now(v);
        if (w != is_weak(full, v, T) || w != trace.flipped[k]) return false;
        if (w) {
            inc.toggle(v);
            full.flip(v);
        }
        for (int u = 0; u < full.size(); ++u)
            if (inc.coop_count(u) != full.coop_neighbors(u)) return false;
    }
    inc.settle();
    return inc.weak_set() == weak_set(full, T);
}

// ---- enumeration

std::vector<RoundOutcome> enumerate_round(const Configuration& config, const CheatAdvantage& T, int threshold) {
    Process proc(config, T);
    auto W = proc.weak_set();
    int m = static_cast<int>(W.size());
    if (m > threshold || m > 24) throw ThresholdExceeded("weak set of size " + std::to_string(m) + " exceeds enumeration threshold");
    if (m == 0) return {RoundOutcome{{}, 1}};

    using State = std::pair<std::uint32_t, std::uint32_t>;   // processed, flipped
    std::map<State, std::uint64_t> level{{{0u, 0u}, 1}};
    std::uint32_t cur = 0;   // flipped set currently applied to proc
    auto apply_mask = [&](std::uint32_t target) {
        std::uint32_t diff = cur ^ target;
        for (int i = 0; i < m; ++i)
            if (diff >> i & 1u) proc.toggle(W[static_cast<std::size_t>(i)]);
        cur = target;
    };
    for (int step = 0; step < m; ++step) {
        std::map<State, std::uint64_t> next;
        for (auto& [st, cnt] : level) {
            apply_mask(st.second);
            for (int i = 0; i < m; ++i) {
                if (st.first >> i & 1u) continue;
                bool flips = proc.weak_now(W[static_cast<std::size_t>(i)]);
                State ns{st.first | 1u << i, flips ? st.second | 1u << i : st.second};
                next[ns] += cnt;
            }
        }
        level.swap(next);
    }
    apply_mask(0);
    std::vector<RoundOutcome> out;
    for (auto& [st, cnt] : level) {
        RoundOutcome o;
        for (int i = 0; i < m; ++i)
            if (st.second >> i & 1u) o.flipped.push_back(W[static_cast<std::size_t>(i)]);
        o.orders = cnt;
        out.push_back(std::move(o));
    }
    std::sort(out.begin(), out.end(), [](const RoundOutcome& a, const RoundOutcome& b) { return a.flipped < b.flipped; });
    return out;
}

std::vector<RoundOutcome> enumerate_round_bruteforce(const Configuration& config, const CheatAdvantage& T, int threshold) {
    Process proc(config, T);
    Permutation p{proc.weak_set()};
    if (static_cast<int>(p.order.size()) > threshold) throw ThresholdExceeded("weak set exceeds enumeration threshold");
    std::map<std::vector<int>, std::uint64_t> tally;
    do {
        auto tr = proc.apply_round(p);
        std::vector<int> f;
        for (std::size_t k = 0; k < p.order.size(); ++k)
            if (tr.flipped[k]) f.push_back(p.order[k]);
        std::sort(f.begin(), f.end());
        ++tally[f];
        proc.revert(tr);
    } while (std::next_permutation(p.order.begin(), p.order.end()));
    std::vector<RoundOutcome> out;
    for (auto& [f, c] : tally) out.push_back({f, c});
    return out;
}

Forcedness is_forced(const Configuration& config, const CheatAdvantage& T, ForcedMode mode, int threshold) {
    Process proc(config, T);
    auto W = proc.weak_set();
    if (W.size() <= 1) return Forcedness::Forced;
    if (mode == ForcedMode::Auto) mode = static_cast<int>(W.size()) <= threshold ? ForcedMode::Exact : ForcedMode::Sufficient;
    if (mode == ForcedMode::Exact) {
        if (static_cast<int>(W.size()) > threshold) throw ThresholdExceeded("weak set exceeds enumeration threshold");
        return enumerate_round(config, T, threshold).size() == 1 ? Forcedness::Forced : Forcedness::NotForced;
    }
    // distance > 2 between every pair: no update can change another's weakness
    const auto& topo = config.topology();
    std::vector<std::uint8_t> is_w(static_cast<std::size_t>(config.size()), 0);
    for (int v : W) is_w[static_cast<std::size_t>(v)] = 1;
    std::array<int, 4> nb, nb2;
    for (int v : W) {
        topo.neighbors(v, nb);
        for (int i = 0; i < topo.degree(); ++i) {
            if (nb[i] < 0) continue;
            if (is_w[static_cast<std::size_t>(nb[i])]) return Forcedness::Unknown;
            topo.neighbors(nb[i], nb2);
            for (int j = 0; j < topo.degree(); ++j)
                if (nb2[j] >= 0 && nb2[j] != v && is_w[static_cast<std::size_t>(nb2[j])]) return Forcedness::Unknown;
        }
    }
    return Forcedness::Forced;
}

std::pair<Configuration, int> collapse_forced(Configuration config, const CheatAdvantage& T, int max_depth) {
    int steps = 0;
    Process proc(std::move(config), T);
    while (!proc.stable() && is_forced(proc.config(), T) == Forcedness::Forced) {
        if (steps >= max_depth) throw DepthExceeded("forced run longer than max depth");
        proc.apply_round(Permutation{proc.weak_set()});
        ++steps;
    }
    return {proc.config(), steps};
}

}  // namespace pdl
