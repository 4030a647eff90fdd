#include "pdl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pdl/acceptance.hpp"
#include "pdl/clusters.hpp"
#include "pdl/engine.hpp"
#include "pdl/exact.hpp"
#include "pdl/montecarlo.hpp"
#include "pdl/plot.hpp"

namespace pdl {

namespace {

// bad input that got past the flag parser
struct UsageError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
    if (!f) throw Error("write failed: " + path);
}

std::string g10(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

TopologyKind parse_topology(const std::string& s) {
    if (s == "cycle") return TopologyKind::Cycle;
    if (s == "torus") return TopologyKind::Torus;
    if (s == "window") return TopologyKind::Window;
    throw UsageError("unknown topology " + s);
}

// p list: "0.1,0.2" or "start:stop:step" (inclusive)
std::vector<double> parse_p_list(const std::string& s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        double a, b, step;
        char c1, c2;
        std::istringstream in(s);
        if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || b < a)
            throw UsageError("bad p range " + s);
        int count = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
        for (int i = 0; i < count; ++i) out.push_back(a + i * step);
        return out;
    }
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("bad p value '" + tok + "'");
        }
    }
    return out;
}

struct KindFlags {
    std::string kind, species;
    int w = 0, h = 0, l = 0;
    bool short_side = false;

    void add(CLI::App* app) {
        app->set_help_flag("--help", "Print this help message and exit");   // -h would clash with --h
        app->add_option("--kind", kind, "family kind, e.g. adjacent-even, adj-transit-c");
        app->add_option("--species", species, "seed species, e.g. Corner3, Square4");
        app->add_option("--w", w, "width");
        app->add_option("--h", h, "height");
        app->add_option("--l", l, "transit length");
        app->add_flag("--short", short_side, "DoubleEvenTransit along the shorter side");
    }
    bool given() const { return !kind.empty() || !species.empty(); }
    ClusterKind resolve() const {
        if (!kind.empty() && !species.empty()) throw UsageError("give --kind or --species, not both");
        if (!species.empty()) {
            auto s = parse_species(species);
            if (!s) throw UsageError("unknown species " + species);
            return *s;
        }
        auto k = parse_dkind(kind);
        if (!k) throw UsageError("unknown kind " + kind);
        DFamilyKind d{*k, w, h, l, short_side};
        if (auto why = check_params(d)) throw UsageError(d.str() + ": " + *why);
        return d;
    }
};

// ---- simulate

struct SimulateFlags {
    std::string topology = "torus", fixture, jsonl = "-", final_out, T = "7/6";
    int size = 100;
    double p = 0.5;
    std::uint64_t seed = 1;
    std::int64_t max_rounds = 1'000'000;
};

int run_simulate(const SimulateFlags& f, std::ostream& out) {
    CheatAdvantage T = CheatAdvantage::parse(f.T);
    Configuration cfg;
    if (!f.fixture.empty()) {
        cfg = parse_fixture(read_file(f.fixture));
    } else {
        auto kind = parse_topology(f.topology);
        if (f.size < 3) throw UsageError("--size must be at least 3");
        // a random window would touch its own edge at once
        if (kind == TopologyKind::Window) throw UsageError("window runs need --fixture");
        Topology topo = kind == TopologyKind::Cycle ? Topology::cycle(f.size) : Topology::torus(f.size);
        cfg = random_config(topo, f.p, f.seed);
    }
    EngineLimits lim;
    lim.max_rounds = f.max_rounds;

    std::ofstream file;
    std::ostream* log = nullptr;
    if (f.jsonl == "-") log = &out;
    else if (!f.jsonl.empty()) {
        file.open(f.jsonl, std::ios::binary);
        if (!file) throw UsageError("cannot write " + f.jsonl);
        log = &file;
    }
    int coop = cfg.cooperators();
    const double V = cfg.size();
    Rng rng(splitmix64(f.seed));
    auto res = run_to_termination(cfg, rng, T, lim, [&](const Process& pr, const RoundTrace& tr, std::int64_t round) {
        for (std::size_t k = 0; k < tr.order.order.size(); ++k)
            if (tr.flipped[k]) coop += is_coop(pr.config()[tr.order.order[k]]) ? 1 : -1;
        if (!log) return;
        nlohmann::ordered_json j;
        j["round"] = round;
        j["weakCount"] = tr.weak_before.size();
        j["flips"] = tr.flips();
        j["density"] = coop / V;
        *log << j.dump() << "\n";
    });
    nlohmann::ordered_json s;
    s["status"] = res.status.str();
    s["rounds"] = res.rounds;
    s["cooperators"] = res.final.cooperators();
    s["r_f"] = to_string(res.final_density);
    s["r_f_decimal"] = g10(static_cast<double>(res.final_density));
    out << s.dump() << "\n";
    if (!f.final_out.empty()) write_file(f.final_out, to_fixture(res.final));
    return 0;
}

// ---- sweep

struct SweepFlags {
    std::string topology = "torus", p, out = "-", T = "7/6";
    int size = 100, replicates = 10;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::int64_t max_rounds = 1'000'000;
};

int run_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
    SweepSpec s;
    s.topology = parse_topology(f.topology);
    s.n = f.size;
    s.p_values = parse_p_list(f.p);
    s.replicates = f.replicates;
    s.master_seed = f.seed;
    s.T = CheatAdvantage::parse(f.T);
    s.limits.max_rounds = f.max_rounds;
    try {
        s.validate();
    } catch (const InvalidParams& e) {
        throw UsageError(e.what());
    }
    auto r = sweep(s, f.threads);
    auto csv = sweep_csv(r.records);
    if (f.out == "-") out << csv;
    else write_file(f.out, csv);
    for (auto& ps : r.summary) {
        err << "p=" << g10(ps.p) << " mean=" << g10(ps.mean) << " se=" << g10(ps.std_error) << " used=" << ps.used;
        for (auto& [st, c] : ps.tally) err << " " << to_string(st) << "=" << c;
        err << "\n";
    }
    return 0;
}

// ---- cluster-evolve

struct EvolveFlags {
    KindFlags kind;
    std::string T = "7/6", final_out;
    std::uint64_t seed = 1;
    int trials = 1, margin = 4;
};

int run_evolve(const EvolveFlags& f, std::ostream& out) {
    if (!f.kind.given()) throw UsageError("cluster-evolve needs --kind or --species");
    if (f.trials < 1 || f.margin < 2) throw UsageError("--trials >= 1 and --margin >= 2 required");
    auto k = f.kind.resolve();
    CheatAdvantage T = CheatAdvantage::parse(f.T);
    auto cells = seed_cells(k);
    Strategy field = seed_field(k);
    std::map<std::string, int> tally;
    Configuration last;
    for (int t = 0; t < f.trials; ++t) {
        // grow the window and replay the trial whenever the cluster reaches its edge
        for (int margin = f.margin;; margin *= 2) {
            try {
                Rng rng(derive_seed(f.seed, 0, static_cast<std::uint64_t>(t)));
                auto res = run_to_termination(embed(cells, field, margin), rng, T, EngineLimits{});
                if (res.status.kind != TerminationStatus::Kind::Stable) {
                    tally[res.status.str()]++;
                } else {
                    auto oc = classify_outcome(cells_of(res.final), true);
                    tally[oc.label()]++;
                }
                last = res.final;
                break;
            } catch (const EscapedWindow&) {
                if (margin > 4096) throw;
            }
        }
    }
    out << "seed\t" << str(k) << "\n";
    for (auto& [label, c] : tally) out << label << "\t" << c << "/" << f.trials << "\n";
    if (!f.final_out.empty()) write_file(f.final_out, to_fixture(last));
    return 0;
}

// ---- transitions

struct TransitionFlags {
    KindFlags kind;
    std::string fixture, T = "7/6";
    int absorb = 0;
};

int run_transitions(const TransitionFlags& f, std::ostream& out) {
    ExactOptions opt;
    opt.T = CheatAdvantage::parse(f.T);
    if (f.absorb > 0) {
        if (!f.kind.given()) throw UsageError("--absorb needs --kind or --species");
        auto r = absorption(f.kind.resolve(), f.absorb, opt);
        out << "step\tstable\tempty\tlive\n";
        for (auto& s : r.per_step)
            out << s.step << "\t" << to_string(s.mass_stable) << "\t" << to_string(s.mass_empty) << "\t"
                << to_string(s.mass_live) << "\n";
        for (auto& [n, m] : r.stable_sizes) out << "StableCells(" << n << ")\t" << to_string(m) << "\n";
        out << "expectedCooperatorsUpper\t" << to_string(r.expected_cooperators_upper) << "\n";
        return 0;
    }
    Configuration cfg;
    if (!f.fixture.empty()) {
        if (f.kind.given()) throw UsageError("give a fixture or a kind, not both");
        cfg = parse_fixture(read_file(f.fixture));
    } else if (f.kind.given()) {
        auto k = f.kind.resolve();
        cfg = embed(seed_cells(k), seed_field(k), 3);
    } else {
        throw UsageError("transitions needs --kind, --species or --fixture");
    }
    out << basic_step_distribution(cfg, opt).tsv();
    return 0;
}

// ---- polyominoes

int run_polyominoes(int k, bool list, bool atlas, int atlas_max, std::ostream& out) {
    if (atlas) {
        for (auto& d : enumerate_kinds(atlas_max)) {
            auto cfg = embed(generate(d).cells(), Strategy::Defect, 2);
            out << "# " << d.str() << " weak=" << weak_set(cfg, CheatAdvantage{}).size() << "\n" << to_fixture(cfg);
        }
        return 0;
    }
    auto polys = enumerate_fixed_polyominoes(k);
    out << "k=" << k << " fixed=" << polys.size() << "\n";
    if (list)
        for (auto& p : polys) out << encode(p.cells()) << "\n";
    return 0;
}

// ---- plot

struct PlotFlags {
    std::string csv, out, title;
    std::vector<std::string> curves;
    std::vector<double> xrange, yrange;
};

int run_plot(const PlotFlags& f) {
    PlotSpec spec;
    spec.csv_text = read_file(f.csv);
    spec.title = f.title;
    for (auto& c : f.curves) {
        auto tc = parse_curve(c);
        if (!tc) throw UsageError("unknown curve " + c);
        spec.curves.push_back(*tc);
    }
    if (f.xrange.size() == 2) spec.x_range = std::pair{f.xrange[0], f.xrange[1]};
    if (f.yrange.size() == 2) spec.y_range = std::pair{f.yrange[0], f.yrange[1]};
    // render first so a bad input leaves no file behind
    auto svg = render_plot(spec);
    write_file(f.out, svg);
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spatial prisoner's dilemma with asynchronous weak-vertex updates"};
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* c_sim = app.add_subcommand("simulate", "run one process to termination, JSONL trajectory on stdout");
    c_sim->add_option("--topology", sim.topology, "cycle | torus | window");
    c_sim->add_option("--size", sim.size, "n (vertices of the cycle, side of the torus or window)");
    c_sim->add_option("--p", sim.p, "initial cooperator probability");
    c_sim->add_option("--seed", sim.seed, "random seed");
    c_sim->add_option("--T", sim.T, "cheating advantage, a/b or decimal");
    c_sim->add_option("--fixture", sim.fixture, "start from a fixture file instead of a random configuration");
    c_sim->add_option("--jsonl", sim.jsonl, "trajectory destination ('-' stdout, '' none)");
    c_sim->add_option("--final", sim.final_out, "write the final configuration as a fixture");
    c_sim->add_option("--max-rounds", sim.max_rounds, "round limit");

    SweepFlags sw;
    auto* c_sw = app.add_subcommand("sweep", "replicated runs over p values, CSV records");
    c_sw->add_option("--topology", sw.topology, "cycle | torus");
    c_sw->add_option("--size", sw.size, "n");
    c_sw->add_option("--p", sw.p, "comma list or start:stop:step")->required();
    c_sw->add_option("--replicates", sw.replicates, "runs per p");
    c_sw->add_option("--seed", sw.seed, "master seed");
    c_sw->add_option("--threads", sw.threads, "worker threads (0 = all cores)");
    c_sw->add_option("--T", sw.T, "cheating advantage");
    c_sw->add_option("--max-rounds", sw.max_rounds, "round limit per run");
    c_sw->add_option("--out", sw.out, "CSV destination ('-' stdout)");

    EvolveFlags ev;
    auto* c_ev = app.add_subcommand("cluster-evolve", "run a seed cluster in its opposite field, tally fates");
    ev.kind.add(c_ev);
    c_ev->add_option("--seed", ev.seed, "random seed");
    c_ev->add_option("--trials", ev.trials, "independent runs");
    c_ev->add_option("--margin", ev.margin, "initial window margin");
    c_ev->add_option("--T", ev.T, "cheating advantage");
    c_ev->add_option("--final", ev.final_out, "write the last final configuration as a fixture");

    TransitionFlags tr;
    auto* c_tr = app.add_subcommand("transitions", "exact basic-step distribution");
    tr.kind.add(c_tr);
    c_tr->add_option("--fixture", tr.fixture, "window fixture to start from");
    c_tr->add_option("--T", tr.T, "cheating advantage");
    c_tr->add_option("--absorb", tr.absorb, "instead report absorption over this many basic steps");

    int poly_k = 4, atlas_max = 6;
    bool poly_list = false, poly_atlas = false;
    auto* c_po = app.add_subcommand("polyominoes", "count fixed polyominoes, or dump the family atlas");
    c_po->add_option("--k", poly_k, "order (1..10)");
    c_po->add_flag("--list", poly_list, "print every shape");
    c_po->add_flag("--atlas", poly_atlas, "dump every family kind as a fixture");
    c_po->add_option("--atlas-max", atlas_max, "largest w,h in the atlas");

    std::string suite = "all";
    unsigned verify_threads = 0;
    auto* c_ve = app.add_subcommand("verify", "run acceptance criteria, one line each");
    c_ve->add_option("--suite", suite, "exact | montecarlo | all | comma list of ids");
    c_ve->add_option("--threads", verify_threads, "worker threads (0 = all cores)");

    PlotFlags pl;
    auto* c_pl = app.add_subcommand("plot", "SVG of sweep means with theory curves");
    c_pl->add_option("--csv", pl.csv, "sweep CSV")->required();
    c_pl->add_option("--out", pl.out, "SVG destination")->required();
    c_pl->add_option("--curve", pl.curves, "theory curve, repeatable (e.g. TorusSmall)");
    c_pl->add_option("--xrange", pl.xrange, "xmin xmax")->expected(2);
    c_pl->add_option("--yrange", pl.yrange, "ymin ymax")->expected(2);
    c_pl->add_option("--title", pl.title, "plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim, out);
        if (c_sw->parsed()) return run_sweep(sw, out, err);
        if (c_ev->parsed()) return run_evolve(ev, out);
        if (c_tr->parsed()) return run_transitions(tr, out);
        if (c_po->parsed()) return run_polyominoes(poly_k, poly_list, poly_atlas, atlas_max, out);
        if (c_pl->parsed()) return run_plot(pl);
        if (c_ve->parsed()) {
            auto results = run_suite(suite_ids(suite), out, verify_threads);
            bool ok = std::all_of(results.begin(), results.end(), [](auto& r) { return r.pass; });
            return ok ? 0 : 1;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidParams& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace pdl
