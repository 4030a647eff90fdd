#include "pdl/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "pdl/clusters.hpp"
#include "pdl/engine.hpp"
#include "pdl/exact.hpp"
#include "pdl/montecarlo.hpp"

namespace pdl {

namespace {

// Every number the suite compares against lives here.
constexpr std::uint64_t kSeedTorusSmall = 20261015;
constexpr std::uint64_t kSeedTorusLarge = 20261016;
constexpr std::uint64_t kSeedTorusTiny = 20261017;
constexpr std::uint64_t kSeedCycle = 20261018;
constexpr std::uint64_t kSeedFloor = 20261019;
constexpr std::uint64_t kSeedInvariants = 20261020;
constexpr std::uint64_t kSeedContainment = 20261021;
constexpr std::uint64_t kSeedCorner3 = 20261022;
constexpr std::uint64_t kSeedDeterminism = 20261023;

constexpr double kSmallPRelTol = 0.20;     // torus small-p band around 20p^3
constexpr double kLargePAbsTol = 0.01;     // torus large-p band around 2p-1
constexpr double kCycleMeanSlack = 0.02;   // o(1) allowance on the cycle expectation bounds
constexpr double kChiSquare1Df001 = 10.828;   // chi-square, 1 dof, upper 0.001 point
constexpr double kContainmentSigmas = 3.0;
constexpr int kSeriesJmax = 10000;
constexpr int kStableTimeMaxWH = 12;

struct Spec {
    const char* name;
    double budget;   // seconds
};

const Spec kSpecs[kCriteria] = {
    {"exact 3-cluster fates", 5},
    {"exact 4-hat fate", 5},
    {"AdjacentEven(8,7) basic step", 30},
    {"3-step stabilisation >= 1/8", 600},
    {"cluster series bound < 8919", 1},
    {"torus small p ~ 20p^3", 600},
    {"torus large p ~ 2p-1", 600},
    {"torus tiny p -> 0", 120},
    {"cycle bounds", 300},
    {"density floor p^13", 120},
    {"invariant suite", 300},
    {"fixed polyomino counts", 1},
    {"containment statistics", 300},
    {"Monte Carlo vs exact Corner3", 60},
    {"sweep determinism", 60},
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;
    void fail(std::string why) {
        pass = false;
        failures.push_back(std::move(why));
    }
    std::string text() const {
        std::string t;
        for (auto& f : failures) t += (t.empty() ? "" : "; ") + f;
        std::string d = detail.str();
        while (d.ends_with("; ")) d.resize(d.size() - 2);
        if (!t.empty() && !d.empty()) t += " | ";
        return t + d;
    }
};

std::string sizes_str(const std::map<int, Rational>& m) {
    std::string s = "{";
    for (auto& [k, v] : m) s += (s.size() > 1 ? ", " : "") + std::to_string(k) + ": " + to_string(v);
    return s + "}";
}

// ---- 1, 2

void c_three_clusters(Outcome& o, unsigned) {
    auto line = absorption(SeedSpecies::Line3, 4);
    auto corner = absorption(SeedSpecies::Corner3, 4);
    const std::map<int, Rational> five{{5, Rational(1)}}, half{{5, Rational(1, 2)}};
    auto empty_of = [](const AbsorptionReport& r) { return r.per_step.empty() ? Rational(0) : r.per_step.back().mass_empty; };
    if (line.stable_sizes != five || empty_of(line) != 0) o.fail("Line3 gave " + sizes_str(line.stable_sizes));
    if (corner.stable_sizes != half || empty_of(corner) != Rational(1, 2))
        o.fail("Corner3 gave " + sizes_str(corner.stable_sizes) + " empty " + to_string(empty_of(corner)));
    if (o.pass) o.detail << "Line3 {StableCells(5): 1}; Corner3 {EmptyCluster: 1/2, StableCells(5): 1/2}";
}

void c_hat(Outcome& o, unsigned) {
    auto r = absorption(SeedSpecies::Hat4, 4);
    if (r.stable_sizes != std::map<int, Rational>{{5, Rational(1)}}) o.fail("Hat4 gave " + sizes_str(r.stable_sizes));
    else o.detail << "Hat4 {StableCells(5): 1}";
}

// ---- 3

void c_figure_transition(Outcome& o, unsigned) {
    DFamilyKind k{DKind::AdjacentEven, 8, 7};
    auto d = basic_step_distribution(embed(generate(k).cells(), Strategy::Defect, 3));
    Rational stable = d.mass([](const OutcomeClass& c) { return c.tag == OutcomeClass::Tag::Stable; });
    Rational ae = d.mass_of("AdjacentEven(8,9)");
    Rational tc = d.mass_of("AdjTransitC(9,8,3)");
    std::string got;
    for (auto& [c, p] : d.outcomes) got += (got.empty() ? "" : ", ") + c.label() + ": " + to_string(p);
    if (d.total() != 1) o.fail("total mass " + to_string(d.total()));
    if (stable != Rational(1, 4)) o.fail("Stable mass " + to_string(stable));
    if (ae != Rational(1, 4)) o.fail("AdjacentEven(8,9) mass " + to_string(ae));
    if (tc != Rational(1, 2)) o.fail("AdjTransitC(9,8,3) mass " + to_string(tc));
    if (d.outcomes.size() != 3) o.fail(std::to_string(d.outcomes.size()) + " outcome classes");
    o.detail << "observed {" << got << "}";
}

// ---- 4

void c_stable_time(Outcome& o, unsigned) {
    auto r = verify_stable_time(enumerate_kinds(kStableTimeMaxWH));
    o.detail << r.checked << " non-stable kinds, min " << to_string(r.minimum) << " at " << r.argmin.str();
    if (r.checked == 0 || r.minimum < Rational(1, 8)) o.fail("minimum below 1/8");
}

// ---- 5

void c_series(Outcome& o, unsigned) {
    Rational prev = 0;
    for (int j = 1; j <= 60; ++j) {
        Rational s = clusterbound_series(j);
        if (!(s > prev)) o.fail("not increasing at jmax=" + std::to_string(j));
        prev = s;
    }
    for (int j : {100, 1000, kSeriesJmax}) {
        Rational s = clusterbound_series(j);
        if (!(s > prev)) o.fail("not increasing at jmax=" + std::to_string(j));
        prev = s;
    }
    Rational lim = clusterbound_limit();
    if (!(prev < 8919)) o.fail("partial sum reaches 8919");
    if (!(lim < 8919)) o.fail("limit reaches 8919");
    if (!(lim - prev <= clusterbound_tail_bound(kSeriesJmax))) o.fail("tail bound violated");
    if (o.pass)
        o.detail << "S(" << kSeriesJmax << ") = " << fmt("%.6f", static_cast<double>(prev)) << ", limit 71351/8 = "
                 << fmt("%.6f", static_cast<double>(lim));
}

// ---- 6-9

SweepSpec torus_spec(std::vector<double> ps, int reps, std::uint64_t seed, int n = 500) {
    SweepSpec s;
    s.topology = TopologyKind::Torus;
    s.n = n;
    s.p_values = std::move(ps);
    s.replicates = reps;
    s.master_seed = seed;
    return s;
}

std::string excluded(const PSummary& s) {
    std::string e;
    for (auto& [st, c] : s.tally)
        if (st != RunStatus::Stable) e += " " + std::string(to_string(st)) + "=" + std::to_string(c);
    return e.empty() ? "" : " excluded:" + e;
}

void c_torus_small(Outcome& o, unsigned threads) {
    auto r = sweep(torus_spec({0.02, 0.03, 0.04, 0.05}, 10, kSeedTorusSmall), threads);
    for (auto& s : r.summary) {
        double target = theory_curve(TheoryCurve::TorusSmall, s.p);
        double rel = s.mean / target - 1;
        std::string line = "p=" + fmt("%g", s.p) + " mean " + fmt("%.4e", s.mean) + " vs " + fmt("%.4e", target) + " (" +
                           fmt("%+.1f", 100 * rel) + "%)" + excluded(s);
        if (s.used == 0 || std::abs(rel) > kSmallPRelTol) o.fail(line);
        else o.detail << line << "; ";
    }
}

void c_torus_large(Outcome& o, unsigned threads) {
    auto r = sweep(torus_spec({0.97, 0.98, 0.99}, 10, kSeedTorusLarge), threads);
    for (auto& s : r.summary) {
        double target = theory_curve(TheoryCurve::TorusLarge, s.p);
        std::string line = "p=" + fmt("%g", s.p) + " mean " + fmt("%.5f", s.mean) + " vs " + fmt("%.2f", target) + excluded(s);
        if (s.used == 0 || std::abs(s.mean - target) > kLargePAbsTol) o.fail(line);
        else o.detail << line << "; ";
    }
}

void c_torus_tiny(Outcome& o, unsigned threads) {
    auto r = sweep(torus_spec({0.002}, 10, kSeedTorusTiny), threads);
    int zero = 0;
    for (auto& rec : r.records) {
        if (rec.status == RunStatus::Stable && rec.r_f == 0) ++zero;
        else o.fail("rep " + std::to_string(rec.rep) + " r_f=" + fmt("%g", rec.r_f) + " " + std::string(to_string(rec.status)));
    }
    if (o.pass) o.detail << zero << "/10 runs end empty";
}

void c_cycle(Outcome& o, unsigned threads) {
    SweepSpec s;
    s.topology = TopologyKind::Cycle;
    s.n = 100000;
    for (int i = 1; i <= 9; ++i) s.p_values.push_back(i / 10.0);
    s.replicates = 10;
    s.master_seed = kSeedCycle;
    auto r = sweep(s, threads);
    for (auto& rec : r.records) {
        if (rec.status != RunStatus::Stable) o.fail("p=" + fmt("%g", rec.p) + " rep " + std::to_string(rec.rep) + " " +
                                                     std::string(to_string(rec.status)));
        double lo = theory_curve(TheoryCurve::CycleLowerAAS, rec.p);
        if (rec.r_f < lo || rec.r_f > rec.p) o.fail("p=" + fmt("%g", rec.p) + " r_f=" + fmt("%.5f", rec.r_f) + " outside a.a.s. bounds");
    }
    for (auto& sm : r.summary) {
        double lo = theory_curve(TheoryCurve::CycleLowerE, sm.p) - kCycleMeanSlack;
        double hi = theory_curve(TheoryCurve::CycleUpperE, sm.p) + kCycleMeanSlack;
        if (sm.mean < lo || sm.mean > hi)
            o.fail("p=" + fmt("%g", sm.p) + " mean " + fmt("%.4f", sm.mean) + " outside [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]");
    }
    if (o.pass) {
        o.detail << "90 runs stable, within bounds; means";
        for (auto& sm : r.summary) o.detail << " " << fmt("%.4f", sm.mean);
    }
}

// ---- 10

void c_floor(Outcome& o, unsigned) {
    const double p = 0.5, floor = theory_curve(TheoryCurve::TorusFloor, p);
    const int n = 200;
    double lowest = 1;
    std::int64_t rounds = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto seed = derive_seed(kSeedFloor, 0, static_cast<std::uint64_t>(rep));
        auto cfg = random_config(Topology::torus(n), p, seed);
        lowest = std::min(lowest, static_cast<double>(cfg.cooperators()) / cfg.size());
        Rng rng(seed ^ 0x5bd1e995ULL);
        // track the cooperator count through the flips instead of rescanning
        int coop = cfg.cooperators();
        auto res = run_to_termination(cfg, rng, CheatAdvantage{}, EngineLimits{}, [&](const Process& pr, const RoundTrace& tr, std::int64_t) {
            for (std::size_t k = 0; k < tr.order.order.size(); ++k)
                if (tr.flipped[k]) coop += is_coop(pr.config()[tr.order.order[k]]) ? 1 : -1;
            double r = static_cast<double>(coop) / pr.config().size();
            lowest = std::min(lowest, r);
            ++rounds;
        });
        if (coop != res.final.cooperators()) o.fail("cooperator bookkeeping drifted");
        if (res.status.kind != TerminationStatus::Kind::Stable) o.detail << "rep " << rep << " " << res.status.str() << "; ";
    }
    o.detail << "min r_t " << fmt("%.4f", lowest) << " over " << rounds << " rounds, floor " << fmt("%.3e", floor);
    if (lowest < floor) o.fail("density fell below p^13");
}

// ---- 11

void c_invariants(Outcome& o, unsigned) {
    const int n = 100;
    const CheatAdvantage T;
    std::int64_t rounds_checked = 0, subround_checked = 0;
    for (int run = 0; run < 100 && o.pass; ++run) {
        double p = (run % 9 + 1) / 10.0;
        auto seed = derive_seed(kSeedInvariants, static_cast<std::uint64_t>(run % 9), static_cast<std::uint64_t>(run));
        auto cfg = random_config(Topology::torus(n), p, seed);
        std::vector<std::uint8_t> persistent(static_cast<std::size_t>(cfg.size()), 0);
        auto mark_persistent = [&](const Configuration& c) {
            for (int v = 0; v < c.size(); ++v)
                if (is_coop(c[v]) && c.coop_neighbors(v) == 4) persistent[static_cast<std::size_t>(v)] = 1;
        };
        // round 0 may still hold isolated defectors; a fully surrounded
        // cooperator there only counts if none sits within distance 2
        {
            const auto& topo = cfg.topology();
            std::vector<int> isolated;
            for (int v = 0; v < cfg.size(); ++v)
                if (!is_coop(cfg[v]) && cfg.coop_neighbors(v) == 4) isolated.push_back(v);
            std::vector<std::uint8_t> near(static_cast<std::size_t>(cfg.size()), 0);
            std::array<int, 4> a{}, b{};
            for (int d : isolated) {
                near[static_cast<std::size_t>(d)] = 1;
                topo.neighbors(d, a);
                for (int u : a) {
                    near[static_cast<std::size_t>(u)] = 1;
                    topo.neighbors(u, b);
                    for (int w : b) near[static_cast<std::size_t>(w)] = 1;
                }
            }
            for (int v = 0; v < cfg.size(); ++v)
                if (is_coop(cfg[v]) && cfg.coop_neighbors(v) == 4 && !near[static_cast<std::size_t>(v)])
                    persistent[static_cast<std::size_t>(v)] = 1;
        }
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        EngineLimits lim;
        lim.max_rounds = 20000;
        run_to_termination(cfg, rng, T, lim, [&](const Process& pr, const RoundTrace& tr, std::int64_t) {
            if (!o.pass) return;
            const auto& c = pr.config();
            ++rounds_checked;
            for (int v = 0; v < c.size(); ++v) {
                int k = c.coop_neighbors(v);
                if (!is_coop(c[v]) && k == 4) return o.fail("isolated defector at round >= 1, run " + std::to_string(run));
                if (persistent[static_cast<std::size_t>(v)] && !is_coop(c[v]))
                    return o.fail("persistent cooperator flipped, run " + std::to_string(run));
                if (pr.coop_count(v) != k) return o.fail("incremental count drift, run " + std::to_string(run));
            }
            if (pr.weak_set() != weak_set(c, T)) return o.fail("incremental weak set drift, run " + std::to_string(run));
            // subround-level replay when it is affordable
            if (tr.order.order.size() * static_cast<std::size_t>(c.size()) <= 4'000'000) {
                Configuration before = c;
                for (std::size_t k = 0; k < tr.order.order.size(); ++k)
                    if (tr.flipped[k]) before.flip(tr.order.order[k]);
                ++subround_checked;
                if (!recompute_vs_incremental(before, tr, T)) return o.fail("subround recompute mismatch, run " + std::to_string(run));
            }
            mark_persistent(c);
        });
    }

    // defector clusters in a cooperator field stay inside their box grown by 2
    std::vector<Polyomino> shapes;
    for (int k = 1; k <= 5; ++k)
        for (auto& s : enumerate_fixed_polyominoes(k)) shapes.push_back(s);
    Rng pick(kSeedInvariants);
    int boxes = 0;
    for (int run = 0; run < 100 && o.pass; ++run) {
        const auto& shape = shapes[pick.below(shapes.size())];
        const int M = 5;
        auto cfg = embed(shape.cells(), Strategy::Cooperate, M);
        const auto& topo = cfg.topology();
        int r0 = M - 2, r1 = M + shape.height() + 1, c0 = M - 2, c1 = M + shape.width() + 1;
        Rng rng(derive_seed(kSeedInvariants, 99, static_cast<std::uint64_t>(run)));
        try {
            run_to_termination(cfg, rng, T, EngineLimits{}, [&](const Process& pr, const RoundTrace&, std::int64_t) {
                const auto& c = pr.config();
                for (int v = 0; v < c.size(); ++v)
                    if (!is_coop(c[v]) && (topo.row(v) < r0 || topo.row(v) > r1 || topo.col(v) < c0 || topo.col(v) > c1))
                        return o.fail("defector left its box, shape " + encode(shape.cells()));
            });
        } catch (const EscapedWindow&) {
            o.fail("defector cluster escaped, shape " + encode(shape.cells()));
        }
        ++boxes;
    }
    if (o.pass)
        o.detail << "100 torus runs, " << rounds_checked << " rounds (" << subround_checked << " replayed per subround), "
                 << boxes << " defector-cluster runs";
}

// ---- 12

void c_polyominoes(Outcome& o, unsigned) {
    const int want[] = {1, 2, 6, 19, 63};
    std::string got;
    for (int k = 1; k <= 5; ++k) {
        int c = static_cast<int>(enumerate_fixed_polyominoes(k).size());
        got += (k > 1 ? ", " : "") + std::to_string(c);
        if (c != want[k - 1]) o.fail("k=" + std::to_string(k) + " gave " + std::to_string(c));
    }
    o.detail << "counts " << got;
}

// ---- 13

void c_containment(Outcome& o, unsigned) {
    for (int i : {3, 6}) {
        auto r = containment_experiment(SeedSpecies::Square4, i, 500, kSeedContainment + static_cast<std::uint64_t>(i));
        double b = std::pow(7.0 / 8.0, i / 3);
        double limit = b + kContainmentSigmas * std::sqrt(b * (1 - b) / r.trials);
        std::string line = "i=" + std::to_string(i) + " escape " + fmt("%.3f", r.fraction()) + " <= " + fmt("%.3f", limit);
        if (r.fraction() > limit) o.fail(line);
        else o.detail << line << "; ";
    }
}

// ---- 14

void c_corner3(Outcome& o, unsigned) {
    const int trials = 10000;
    auto base = embed(generate(SeedSpecies::Corner3).cells(), Strategy::Defect, 4);
    int empty = 0, stable5 = 0, other = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(kSeedCorner3, 0, static_cast<std::uint64_t>(t)));
        auto res = run_to_termination(base, rng, CheatAdvantage{}, EngineLimits{});
        int c = res.final.cooperators();
        if (res.status.kind == TerminationStatus::Kind::Stable && c == 0) ++empty;
        else if (res.status.kind == TerminationStatus::Kind::Stable && c == 5) ++stable5;
        else ++other;
    }
    double e = trials / 2.0;
    double chi = (empty - e) * (empty - e) / e + (stable5 - e) * (stable5 - e) / e;
    o.detail << "empty " << empty << ", stable5 " << stable5 << ", other " << other << ", chi2 " << fmt("%.3f", chi);
    if (other != 0) o.fail("runs ending elsewhere");
    if (chi > kChiSquare1Df001) o.fail("chi-square above the 0.001 point");
}

// ---- 15

void c_determinism(Outcome& o, unsigned) {
    auto spec = torus_spec({0.05, 0.3, 0.5, 0.7, 0.95}, 4, kSeedDeterminism, 100);
    auto ref = sweep_csv(sweep(spec, 1).records);
    for (unsigned t : {1u, 2u, 3u, 8u}) {
        auto csv = sweep_csv(sweep(spec, t).records);
        if (csv != ref) o.fail("CSV differs with " + std::to_string(t) + " threads");
    }
    if (o.pass) o.detail << "identical CSV (" << ref.size() << " bytes) for 1, 2, 3, 8 threads";
}

using Fn = void (*)(Outcome&, unsigned);
const Fn kFns[kCriteria] = {c_three_clusters, c_hat,        c_figure_transition, c_stable_time, c_series,
                            c_torus_small,    c_torus_large, c_torus_tiny,        c_cycle,       c_floor,
                            c_invariants,     c_polyominoes, c_containment,       c_corner3,     c_determinism};

}  // namespace

std::string criterion_name(int id) {
    if (id < 1 || id > kCriteria) throw InvalidParams("no criterion " + std::to_string(id));
    return kSpecs[id - 1].name;
}

std::vector<int> suite_ids(std::string_view suite) {
    if (suite == "exact") return {1, 2, 3, 4, 5, 12};
    if (suite == "montecarlo") return {6, 7, 8, 9, 10, 11, 13, 14, 15};
    if (suite == "all") {
        std::vector<int> v;
        for (int i = 1; i <= kCriteria; ++i) v.push_back(i);
        return v;
    }
    std::vector<int> v;
    std::string s(suite);
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            std::size_t pos = 0;
            int id = std::stoi(tok, &pos);
            if (pos != tok.size() || id < 1 || id > kCriteria) throw InvalidParams("");
            v.push_back(id);
        } catch (const std::exception&) {
            throw InvalidParams("unknown suite or criterion '" + tok + "'");
        }
    }
    if (v.empty()) throw InvalidParams("empty suite");
    return v;
}

CriterionResult run_criterion(int id, unsigned threads) {
    CriterionResult r;
    r.id = id;
    r.name = criterion_name(id);
    r.budget = kSpecs[id - 1].budget;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
        kFns[id - 1](o, threads);
    } catch (const std::exception& e) {
        o.fail(std::string("exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = o.pass;
    r.detail = o.text();
    if (r.seconds > r.budget) {
        r.pass = false;
        r.detail += " | over time budget " + fmt("%.0f", r.budget) + " s";
    }
    return r;
}

std::string format_line(const CriterionResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "%s %2d %-32s %8.2fs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    return head + r.detail;
}

std::vector<CriterionResult> run_suite(const std::vector<int>& ids, std::ostream& out, unsigned threads) {
    std::vector<CriterionResult> res;
    for (int id : ids) {
        res.push_back(run_criterion(id, threads));
        out << format_line(res.back()) << "\n" << std::flush;
    }
    return res;
}

}  // namespace pdl
