#include "pdl/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <queue>
#include <set>
#include <sstream>
#include <thread>

namespace pdl {

Configuration random_config(const Topology& topo, double p, std::uint64_t seed) {
    if (!(p > 0 && p < 1)) throw InvalidParams("p must lie in (0,1)");
    Rng rng(seed);
    std::vector<Strategy> cells(static_cast<std::size_t>(topo.vertex_count()));
    for (auto& s : cells) s = rng.unit() < p ? Strategy::Cooperate : Strategy::Defect;
    return Configuration(topo, std::move(cells), Strategy::Defect);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t p_index, std::uint64_t rep) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ p_index) ^ rep);
}

void SweepSpec::validate() const {
    if (p_values.empty()) throw InvalidParams("no p values");
    for (double p : p_values)
        if (!(p > 0 && p < 1)) throw InvalidParams("p values must lie in (0,1)");
    if (replicates < 1) throw InvalidParams("replicates must be at least 1");
    if (n < 3) throw InvalidParams("size must be at least 3");
    if (topology == TopologyKind::Window) throw InvalidParams("sweeps run on cycles or tori");
}

std::string_view to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Stable: return "stable";
    case RunStatus::Periodic: return "periodic";
    case RunStatus::MaxRounds: return "maxrounds";
    case RunStatus::Escaped: return "escaped";
    case RunStatus::Error: return "error";
    }
    return "?";
}

namespace {
Topology make_topology(TopologyKind k, int n) {
    return k == TopologyKind::Cycle ? Topology::cycle(n) : Topology::torus(n);
}

// the dynamics draw from a stream separate from the initial configuration
constexpr std::uint64_t kDynamicsSalt = 0x6a09e667f3bcc909ULL;
}  // namespace

RunRecord run_trial(const SweepSpec& spec, int p_index, int rep) {
    RunRecord r;
    r.p = spec.p_values.at(static_cast<std::size_t>(p_index));
    r.n = spec.n;
    r.p_index = p_index;
    r.rep = rep;
    r.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(p_index), static_cast<std::uint64_t>(rep));
    try {
        auto cfg = random_config(make_topology(spec.topology, spec.n), r.p, r.seed);
        Rng rng(r.seed ^ kDynamicsSalt);
        auto res = run_to_termination(std::move(cfg), rng, spec.T, spec.limits);
        r.rounds = res.rounds;
        r.r_f = static_cast<double>(res.final.cooperators()) / res.final.size();
        switch (res.status.kind) {
        case TerminationStatus::Kind::Stable: r.status = RunStatus::Stable; break;
        case TerminationStatus::Kind::Periodic: r.status = RunStatus::Periodic; break;
        case TerminationStatus::Kind::MaxRoundsExceeded: r.status = RunStatus::MaxRounds; break;
        }
    } catch (const EscapedWindow& e) {
        r.status = RunStatus::Escaped;
        r.error = e.what();
    } catch (const Error& e) {
        r.status = RunStatus::Error;
        r.error = e.what();
    }
    return r;
}

SweepResult sweep(const SweepSpec& spec, unsigned threads) {
    spec.validate();
    const int P = static_cast<int>(spec.p_values.size());
    const std::size_t total = static_cast<std::size_t>(P) * static_cast<std::size_t>(spec.replicates);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));

    SweepResult out;
    out.records.resize(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < total;) {
            int pi = static_cast<int>(i / static_cast<std::size_t>(spec.replicates));
            int rep = static_cast<int>(i % static_cast<std::size_t>(spec.replicates));
            out.records[i] = run_trial(spec, pi, rep);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    out.summary = summarize(out.records);
    return out;
}

std::vector<PSummary> summarize(const std::vector<RunRecord>& records) {
    std::vector<PSummary> out;
    std::map<double, std::size_t> slot;
    for (auto& r : records) {
        auto [it, fresh] = slot.try_emplace(r.p, out.size());
        if (fresh) {
            out.push_back({});
            out.back().p = r.p;
        }
        auto& s = out[it->second];
        s.tally[r.status]++;
    }
    for (auto& s : out) {
        std::vector<double> xs;
        for (auto& r : records)
            if (r.p == s.p && r.status == RunStatus::Stable) xs.push_back(r.r_f);
        s.used = static_cast<int>(xs.size());
        if (xs.empty()) continue;
        double sum = 0;
        for (double x : xs) sum += x;
        s.mean = sum / xs.size();
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std_error = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1) / xs.size()) : 0.0;
        auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        s.min = *lo;
        s.max = *hi;
    }
    return out;
}

namespace {
std::string fmt_g10(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}
}  // namespace

std::string sweep_csv(const std::vector<RunRecord>& records) {
    std::string s = "p,n,rep,seed,r_f,rounds,status\n";
    for (auto& r : records) {
        s += fmt_g10(r.p) + "," + std::to_string(r.n) + "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," +
             fmt_g10(r.r_f) + "," + std::to_string(r.rounds) + "," + std::string(to_string(r.status)) + "\n";
    }
    return s;
}

std::vector<RunRecord> parse_sweep_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "p,n,rep,seed,r_f,rounds,status")
        throw ParseError("sweep csv: bad or missing header");
    std::vector<RunRecord> out;
    std::map<double, int> pidx;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw ParseError("sweep csv line " + std::to_string(lineno) + ": expected 7 fields");
        RunRecord r;
        try {
            std::size_t pos = 0;
            r.p = std::stod(f[0], &pos);
            r.n = std::stoi(f[1]);
            r.rep = std::stoi(f[2]);
            r.seed = std::stoull(f[3]);
            r.r_f = std::stod(f[4]);
            r.rounds = std::stoll(f[5]);
        } catch (const std::exception&) {
            throw ParseError("sweep csv line " + std::to_string(lineno) + ": bad number");
        }
        const std::string& st = f[6];
        if (st == "stable") r.status = RunStatus::Stable;
        else if (st == "periodic") r.status = RunStatus::Periodic;
        else if (st == "maxrounds") r.status = RunStatus::MaxRounds;
        else if (st == "escaped") r.status = RunStatus::Escaped;
        else if (st == "error") r.status = RunStatus::Error;
        else throw ParseError("sweep csv line " + std::to_string(lineno) + ": unknown status " + st);
        if (!(r.r_f >= 0 && r.r_f <= 1)) throw ParseError("sweep csv line " + std::to_string(lineno) + ": r_f outside [0,1]");
        r.p_index = pidx.try_emplace(r.p, static_cast<int>(pidx.size())).first->second;
        out.push_back(r);
    }
    if (out.empty()) throw ParseError("sweep csv has no records");
    return out;
}

// ---- theory curves

std::string name(TheoryCurve c) {
    switch (c) {
    case TheoryCurve::CycleLowerE: return "CycleLowerE";
    case TheoryCurve::CycleUpperE: return "CycleUpperE";
    case TheoryCurve::CycleLowerAAS: return "CycleLowerAAS";
    case TheoryCurve::TorusSmall: return "TorusSmall";
    case TheoryCurve::TorusSmallUpper: return "TorusSmallUpper";
    case TheoryCurve::TorusLarge: return "TorusLarge";
    case TheoryCurve::TorusFloor: return "TorusFloor";
    }
    return "?";
}

std::optional<TheoryCurve> parse_curve(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(TheoryCurve::TorusFloor); ++i) {
        auto c = static_cast<TheoryCurve>(i);
        if (name(c) == s) return c;
    }
    return std::nullopt;
}

double theory_curve(TheoryCurve c, double p, int n) {
    if (!(p > 0 && p < 1)) throw InvalidParams("p must lie in (0,1)");
    double q = 1 - p;
    switch (c) {
    case TheoryCurve::CycleLowerE: return 3 * std::pow(p, 5) - 2 * std::pow(p, 6);
    case TheoryCurve::CycleUpperE: return p - p * q * q - 2 * p * p * q * q;
    case TheoryCurve::CycleLowerAAS: return 3 * std::pow(p, 5) * q * q;
    case TheoryCurve::TorusSmall: return 20 * std::pow(p, 3);
    case TheoryCurve::TorusSmallUpper: {
        if (n < 2) throw InvalidParams("TorusSmallUpper needs n >= 2");
        double l = std::log(static_cast<double>(n));
        return 20 * std::pow(p, 3) + 2 * 19 * std::pow(l, 4) * std::pow(p, 4);
    }
    case TheoryCurve::TorusLarge: return 2 * p - 1;
    case TheoryCurve::TorusFloor: return std::pow(p, 13);
    }
    return 0;
}

// ---- census

std::map<CellSet, int> cluster_census(const Configuration& c, int max_size) {
    const auto& topo = c.topology();
    const bool cyc = topo.kind() == TopologyKind::Cycle;
    static constexpr int dx4[4] = {0, 0, -1, 1}, dy4[4] = {-1, 1, 0, 0};
    static constexpr int dx2[2] = {-1, 1};
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(c.size()), 0);
    std::map<CellSet, int> out;
    std::array<int, 4> nb{};
    for (int s = 0; s < c.size(); ++s) {
        if (seen[static_cast<std::size_t>(s)] || !is_coop(c[s])) continue;
        CellSet comp;
        std::queue<std::pair<int, Cell>> q;
        q.push({s, {0, 0}});
        seen[static_cast<std::size_t>(s)] = 1;
        while (!q.empty()) {
            auto [v, at] = q.front();
            q.pop();
            if (static_cast<int>(comp.size()) <= max_size) comp.push_back(at);
            topo.neighbors(v, nb);
            for (int k = 0; k < topo.degree(); ++k) {
                int u = nb[static_cast<std::size_t>(k)];
                if (u < 0 || seen[static_cast<std::size_t>(u)] || !is_coop(c[u])) continue;
                seen[static_cast<std::size_t>(u)] = 1;
                Cell next = cyc ? Cell{at.x + dx2[k], at.y} : Cell{at.x + dx4[k], at.y + dy4[k]};
                q.push({u, next});
            }
        }
        if (static_cast<int>(comp.size()) <= max_size) out[normalized(comp)]++;
    }
    return out;
}

int perimeter(const CellSet& cells) {
    std::set<Cell> in(cells.begin(), cells.end()), border;
    for (auto [x, y] : cells)
        for (Cell n : {Cell{x + 1, y}, Cell{x - 1, y}, Cell{x, y + 1}, Cell{x, y - 1}})
            if (!in.count(n)) border.insert(n);
    return static_cast<int>(border.size());
}

// ---- containment

ContainmentResult containment_experiment(SeedSpecies species, int i, int trials, std::uint64_t seed,
                                         const CheatAdvantage& T, std::optional<int> margin) {
    if (i < 0 || trials < 1) throw InvalidParams("containment needs i >= 0 and trials >= 1");
    ContainmentResult res;
    res.radius = 2 * i + 4;
    res.trials = trials;
    // a cell one step past the ball must still sit inside the window, with the
    // field cell beyond it readable
    int M = margin.value_or(res.radius + 3);
    if (M < res.radius + 2) throw EscapedWindow("window margin " + std::to_string(M) + " too small for radius " +
                                                std::to_string(res.radius));
    auto cells = generate(species).cells();
    Strategy field = opposite(species_strategy(species));
    Configuration base = embed(cells, field, M);
    const auto& topo = base.topology();

    // distance to the seed for every window cell, computed once
    std::vector<int> dist(static_cast<std::size_t>(base.size()));
    for (int v = 0; v < base.size(); ++v) {
        int best = 1 << 30;
        for (auto [x, y] : cells)
            best = std::min(best, std::abs(topo.col(v) - (x + M)) + std::abs(topo.row(v) - (y + M)));
        dist[static_cast<std::size_t>(v)] = best;
    }

    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, 0, static_cast<std::uint64_t>(t)));
        Process proc(base, T);
        bool escaped = false;
        for (std::int64_t round = 0; !proc.stable() && !escaped; ++round) {
            if (round > 100000) throw Error("containment run did not settle");
            auto tr = proc.step(rng);
            for (std::size_t k = 0; k < tr.order.order.size(); ++k) {
                int v = tr.order.order[k];
                if (tr.flipped[k] && proc.config()[v] != field && dist[static_cast<std::size_t>(v)] > res.radius) {
                    escaped = true;
                    break;
                }
            }
        }
        if (escaped) ++res.escapes;
    }
    return res;
}

}  // namespace pdl
