#include "pdl/exact.hpp"

#include <algorithm>
#include <sstream>

namespace pdl {

namespace {
constexpr int kMargin = 3;   // one round grows a cluster by at most one cell

std::uint64_t factorial(std::size_t m) {
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= m; ++i) f *= i;
    return f;
}

Configuration toggled(const Configuration& c, const std::vector<int>& flips) {
    Configuration out = c;
    for (int v : flips) out.flip(v);
    return out;
}
}  // namespace

// ---- outcome classes

std::string OutcomeClass::label() const {
    switch (tag) {
    case Tag::Empty: return "EmptyCluster";
    case Tag::Stable:
        if (kind) return str(*kind);
        return "StableCells(" + std::to_string(count()) + ")";
    case Tag::Family:
    case Tag::Seed: return str(*kind);
    case Tag::Unclassified: return "Unclassified(" + std::to_string(count()) + ":" + encode(canonical) + ")";
    }
    return "?";
}

std::string OutcomeClass::sort_key() const { return label() + "|" + encode(canonical); }

OutcomeClass classify_outcome(const CellSet& cells, bool stable) {
    OutcomeClass oc;
    oc.canonical = dihedral_canonical(cells).first;
    if (cells.empty()) {
        oc.tag = OutcomeClass::Tag::Empty;
        return oc;
    }
    auto k = is_connected(cells) ? classify(cells) : std::nullopt;
    if (stable) {
        oc.tag = OutcomeClass::Tag::Stable;
        if (k && std::holds_alternative<DFamilyKind>(*k) && std::get<DFamilyKind>(*k).kind == DKind::Stable) oc.kind = k;
        return oc;
    }
    if (!k) {
        oc.tag = OutcomeClass::Tag::Unclassified;
        return oc;
    }
    oc.tag = std::holds_alternative<SeedSpecies>(*k) ? OutcomeClass::Tag::Seed : OutcomeClass::Tag::Family;
    oc.kind = k;
    return oc;
}

Rational TransitionDistribution::total() const {
    Rational t = 0;
    for (auto& [c, p] : outcomes) t += p;
    return t;
}

Rational TransitionDistribution::mass(const std::function<bool(const OutcomeClass&)>& pred) const {
    Rational t = 0;
    for (auto& [c, p] : outcomes)
        if (pred(c)) t += p;
    return t;
}

Rational TransitionDistribution::mass_of(const std::string& label) const {
    return mass([&](const OutcomeClass& c) { return c.label() == label; });
}

std::string TransitionDistribution::tsv() const {
    std::string s;
    for (auto& [c, p] : outcomes) s += c.label() + "\t" + to_string(p) + "\n";
    return s;
}

namespace {
TransitionDistribution make_distribution(std::vector<std::pair<OutcomeClass, Rational>> raw) {
    std::sort(raw.begin(), raw.end(), [](auto& a, auto& b) { return a.first.sort_key() < b.first.sort_key(); });
    TransitionDistribution d;
    for (auto& [c, p] : raw) {
        if (!d.outcomes.empty() && d.outcomes.back().first == c) d.outcomes.back().second += p;
        else d.outcomes.emplace_back(std::move(c), p);
    }
    return d;
}
}  // namespace

// ---- single rounds

std::vector<std::pair<Configuration, Rational>> round_distribution(const Configuration& config, const ExactOptions& opt) {
    auto outs = enumerate_round(config, opt.T, opt.threshold);
    std::uint64_t total = 0;
    for (auto& o : outs) total += o.orders;
    std::vector<std::pair<Configuration, Rational>> res;
    for (auto& o : outs) res.emplace_back(toggled(config, o.flipped), Rational(o.orders, total));
    return res;
}

// ---- cluster chain

ClusterChain::ClusterChain(Strategy field, ExactOptions opt) : field_(field), opt_(opt) {}

bool ClusterChain::is_stable(const CellSet& cells) const {
    Process p(embed(cells, field_, kMargin), opt_.T);
    return p.stable();
}

CellSet ClusterChain::collapse(const CellSet& start, int* steps_out) const {
    CellSet cells = normalized(start);
    int steps = 0;
    while (true) {
        auto cfg = embed(cells, field_, kMargin);
        Process p(cfg, opt_.T);
        if (p.stable()) break;
        auto f = is_forced(cfg, opt_.T, ForcedMode::Auto, opt_.threshold);
        if (f != Forcedness::Forced) break;   // Unknown counts as choiceful
        if (steps >= opt_.max_forced_depth) throw DepthExceeded("forced run longer than max depth");
        p.apply_round(Permutation{p.weak_set()});
        cells = normalized(cells_of(p.config()));
        ++steps;
    }
    if (steps_out) *steps_out = steps;
    return cells;
}

const ClusterChain::Dist& ClusterChain::basic_step(const CellSet& canonical) {
    if (auto it = memo_.find(canonical); it != memo_.end()) return it->second;
    auto cfg = embed(canonical, field_, kMargin);
    std::map<CellSet, Rational> merged;
    if (Process(cfg, opt_.T).stable()) {
        merged[canonical] = 1;
    } else {
        auto outs = enumerate_round(cfg, opt_.T, opt_.threshold);
        std::uint64_t total = factorial(Process(cfg, opt_.T).weak_count());
        for (auto& o : outs) {
            CellSet next = collapse(cells_of(toggled(cfg, o.flipped)));
            merged[dihedral_canonical(next).first] += Rational(o.orders, total);
        }
    }
    Dist d(merged.begin(), merged.end());
    return memo_.emplace(canonical, std::move(d)).first->second;
}

Rational ClusterChain::stable_within(const CellSet& canonical, int steps) {
    if (is_stable(canonical)) return 1;
    if (steps == 0) return 0;
    auto key = std::make_pair(canonical, steps);
    if (auto it = within_.find(key); it != within_.end()) return it->second;
    Rational p = 0;
    Dist d = basic_step(canonical);   // copy: recursion may rehash nothing, but stay safe
    for (auto& [next, q] : d) p += q * stable_within(next, steps - 1);
    within_[key] = p;
    return p;
}

TransitionDistribution basic_step_distribution(const Configuration& config, const ExactOptions& opt) {
    std::vector<std::pair<OutcomeClass, Rational>> raw;
    if (config.topology().kind() == TopologyKind::Window) {
        ClusterChain chain(config.field(), opt);
        CellSet cells = normalized(cells_of(config));
        auto canon = dihedral_canonical(cells).first;
        for (auto& [next, p] : chain.basic_step(canon)) raw.emplace_back(classify_outcome(next, chain.is_stable(next)), p);
        return make_distribution(std::move(raw));
    }
    // cycle / torus: no recentring, outcomes keyed by the cooperator cells
    for (auto& [succ, p] : round_distribution(config, opt)) {
        auto [c, steps] = collapse_forced(succ, opt.T, opt.max_forced_depth);
        CellSet cells;
        for (int v = 0; v < c.size(); ++v)
            if (is_coop(c[v])) cells.push_back({c.topology().col(v), c.topology().row(v)});
        OutcomeClass oc;
        oc.tag = weak_set(c, opt.T).empty() ? (cells.empty() ? OutcomeClass::Tag::Empty : OutcomeClass::Tag::Stable)
                                            : OutcomeClass::Tag::Unclassified;
        oc.canonical = cells;   // positions matter on a finite graph
        raw.emplace_back(std::move(oc), p);
    }
    return make_distribution(std::move(raw));
}

// ---- seeds and absorption

CellSet seed_cells(const ClusterKind& k) {
    if (auto d = std::get_if<DFamilyKind>(&k)) return generate(*d).cells();
    return generate(std::get<SeedSpecies>(k)).cells();
}

Strategy seed_field(const ClusterKind& k) {
    if (auto s = std::get_if<SeedSpecies>(&k)) return opposite(species_strategy(*s));
    return Strategy::Defect;
}

AbsorptionReport absorption(const ClusterKind& seed, int max_basic_steps, const ExactOptions& opt) {
    ClusterChain chain(seed_field(seed), opt);
    std::map<CellSet, Rational> live{{dihedral_canonical(seed_cells(seed)).first, Rational(1)}};
    AbsorptionReport rep;
    Rational stable = 0, empty = 0;
    Rational expected = 0;
    for (int step = 1; step <= max_basic_steps && !live.empty(); ++step) {
        std::map<CellSet, Rational> next;
        for (auto& [cells, p] : live)
            for (auto& [succ, q] : chain.basic_step(cells)) next[succ] += p * q;
        live.clear();
        for (auto& [cells, p] : next) {
            if (cells.empty()) {
                empty += p;
            } else if (chain.is_stable(cells)) {
                stable += p;
                rep.stable_sizes[static_cast<int>(cells.size())] += p;
                expected += p * static_cast<int>(cells.size());
            } else {
                live[cells] += p;
            }
        }
        rep.per_step.push_back({step, stable, empty, 1 - stable - empty});
    }
    // whatever is still running: charge it the full-series bound
    rep.expected_cooperators_upper = expected + (1 - stable - empty) * clusterbound_limit();
    return rep;
}

StableTimeResult verify_stable_time(const std::vector<DFamilyKind>& kinds, const ExactOptions& opt) {
    ClusterChain chain(Strategy::Defect, opt);
    StableTimeResult res;
    bool first = true;
    for (auto& k : kinds) {
        auto canon = dihedral_canonical(generate(k).cells()).first;
        if (chain.is_stable(canon)) continue;
        Rational p = chain.stable_within(canon, 3);
        res.per_kind.emplace_back(k, p);
        ++res.checked;
        if (first || p < res.minimum) {
            res.minimum = p;
            res.argmin = k;
            first = false;
        }
    }
    return res;
}

// ---- series

namespace {
BigInt series_poly(int j) {
    BigInt jj = j;
    return 72 * jj * jj + 180 * jj + 113;
}
}  // namespace

Rational clusterbound_series(int jmax) {
    if (jmax < 1) throw InvalidParams("jmax must be at least 1");
    // acc = sum 7^j q(j) 8^(jmax-j); value = acc / 8^(jmax+1)
    BigInt acc = 0, seven = 1, eight = 8;
    for (int j = 1; j <= jmax; ++j) {
        seven *= 7;
        acc = acc * 8 + seven * series_poly(j);
        eight *= 8;
    }
    return Rational(acc, eight);
}

Rational clusterbound_limit() {
    // sum j x^j = 56 and sum j^2 x^j = 840 at x = 7/8, sum x^j = 7
    return Rational(72 * 840 + 180 * 56 + 113 * 7, 8);
}

Rational clusterbound_tail_bound(int jmax) {
    // terms t_j = (7/8)^j q(j) / 8; the ratio t_{j+1}/t_j falls with j, so
    // past jmax the tail is at most t_{jmax+1} / (1 - rho)
    int j = jmax + 1;
    Rational rho = Rational(7, 8) * Rational(series_poly(j + 1), series_poly(j));
    if (rho >= 1) throw InvalidParams("tail bound needs a larger jmax");
    BigInt p7 = 1, p8 = 1;
    for (int i = 0; i < j; ++i) {
        p7 *= 7;
        p8 *= 8;
    }
    Rational term = Rational(p7 * series_poly(j), p8 * 8);
    return term / (1 - rho);
}

}  // namespace pdl
