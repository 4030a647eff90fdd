#include <doctest.h>

#include <cmath>

#include "pdl/montecarlo.hpp"
#include "pdl/plot.hpp"

using namespace pdl;

TEST_SUITE("montecarlo") {

TEST_CASE("random configurations are reproducible and have the right density") {
    auto t = Topology::torus(200);
    auto a = random_config(t, 0.3, 42), b = random_config(t, 0.3, 42), c = random_config(t, 0.3, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    double n = t.vertex_count(), mean = n * 0.3, sd = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(a.cooperators() - mean) < 4 * sd);
    CHECK_THROWS_AS(random_config(t, 0.0, 1), InvalidParams);
    CHECK_THROWS_AS(random_config(t, 1.0, 1), InvalidParams);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 0, 0) == splitmix64(splitmix64(splitmix64(1))));
    CHECK(derive_seed(1, 2, 3) == splitmix64(splitmix64(splitmix64(1) ^ 2) ^ 3));
    CHECK(derive_seed(1, 0, 1) != derive_seed(1, 1, 0));
}

TEST_CASE("theory curves") {
    CHECK(theory_curve(TheoryCurve::TorusSmall, 0.1) == doctest::Approx(0.02));
    CHECK(theory_curve(TheoryCurve::TorusLarge, 0.9) == doctest::Approx(0.8));
    CHECK(theory_curve(TheoryCurve::CycleLowerE, 0.5) == doctest::Approx(3.0 / 32 - 2.0 / 64));
    CHECK(theory_curve(TheoryCurve::TorusSmallUpper, 0.1, 100) > theory_curve(TheoryCurve::TorusSmall, 0.1));
    for (double p = 0.01; p < 1; p += 0.01)
        CHECK(theory_curve(TheoryCurve::CycleLowerE, p) <= theory_curve(TheoryCurve::CycleUpperE, p) + 1e-12);
    CHECK_THROWS_AS(theory_curve(TheoryCurve::TorusSmall, 0.0), InvalidParams);
    CHECK_THROWS_AS(theory_curve(TheoryCurve::TorusSmallUpper, 0.1, 1), InvalidParams);
    for (auto c : {TheoryCurve::CycleLowerE, TheoryCurve::CycleUpperE, TheoryCurve::CycleLowerAAS, TheoryCurve::TorusSmall,
                   TheoryCurve::TorusSmallUpper, TheoryCurve::TorusLarge, TheoryCurve::TorusFloor})
        CHECK(parse_curve(name(c)) == c);
    CHECK_FALSE(parse_curve("Nope"));
}

TEST_CASE("sweeps do not depend on the thread count") {
    SweepSpec spec;
    spec.n = 40;
    spec.p_values = {0.1, 0.5, 0.9};
    spec.replicates = 4;
    spec.master_seed = 77;
    auto one = sweep(spec, 1), four = sweep(spec, 4);
    CHECK(sweep_csv(one.records) == sweep_csv(four.records));
    REQUIRE(one.summary.size() == 3);
    for (auto& s : one.summary) CHECK(s.used + s.tally[RunStatus::Periodic] + s.tally[RunStatus::MaxRounds] <= 4);
    CHECK(one.records[5].seed == derive_seed(77, 1, 1));
    auto again = run_trial(spec, 1, 1);
    CHECK(again.r_f == one.records[5].r_f);
}

TEST_CASE("sweep CSV round trip and errors") {
    SweepSpec spec;
    spec.topology = TopologyKind::Cycle;
    spec.n = 30;
    spec.p_values = {0.3, 0.7};
    spec.replicates = 3;
    auto res = sweep(spec, 1);
    auto text = sweep_csv(res.records);
    CHECK(text.rfind("p,n,rep,seed,r_f,rounds,status\n", 0) == 0);
    auto back = parse_sweep_csv(text);
    REQUIRE(back.size() == res.records.size());
    CHECK(sweep_csv(back) == text);
    auto s = summarize(back);
    REQUIRE(s.size() == 2);
    CHECK(s[0].used == 3);   // cycles always settle
    CHECK_THROWS_AS(parse_sweep_csv(""), ParseError);
    CHECK_THROWS_AS(parse_sweep_csv("p,n\n"), ParseError);
    CHECK_THROWS_AS(parse_sweep_csv("p,n,rep,seed,r_f,rounds,status\n0.1,10,0,1,0.5,3\n"), ParseError);
    CHECK_THROWS_AS(parse_sweep_csv("p,n,rep,seed,r_f,rounds,status\n0.1,10,0,1,1.5,3,stable\n"), ParseError);
    CHECK_THROWS_AS(parse_sweep_csv("p,n,rep,seed,r_f,rounds,status\n0.1,10,0,1,0.5,3,odd\n"), ParseError);
}

TEST_CASE("sweep validation") {
    SweepSpec spec;
    spec.p_values = {};
    CHECK_THROWS_AS(spec.validate(), InvalidParams);
    spec.p_values = {1.5};
    CHECK_THROWS_AS(spec.validate(), InvalidParams);
    spec.p_values = {0.5};
    spec.replicates = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidParams);
}

TEST_CASE("cluster census follows the independent-site formula") {
    const int n = 300;
    const double p = 0.2, q = 1 - p;
    auto c = random_config(Topology::torus(n), p, 9);
    auto census = cluster_census(c, 3);
    auto expect = [&](const CellSet& shape) {
        return double(n) * n * std::pow(p, double(shape.size())) * std::pow(q, perimeter(shape));
    };
    for (const CellSet& raw : {CellSet{{0, 0}}, CellSet{{0, 0}, {1, 0}}, CellSet{{0, 0}, {1, 0}, {2, 0}},
                               CellSet{{0, 0}, {1, 0}, {0, 1}}}) {
        auto shape = normalized(raw);
        double e = expect(shape);
        CHECK_MESSAGE(std::abs(census[shape] - e) < 4 * std::sqrt(e), encode(shape) << " " << census[shape] << " vs " << e);
    }
    CHECK(census.size() == 1 + 2 + 6);   // every fixed shape up to three cells
}

TEST_CASE("census at low density") {
    const int n = 500;
    const double p = 0.02;
    auto census = cluster_census(random_config(Topology::torus(n), p, 2), 3);
    for (auto& [shape, count] : census) {
        if (shape.size() != 3) continue;
        double e = double(n) * n * std::pow(p, 3) * std::pow(1 - p, perimeter(shape));
        CHECK_MESSAGE(std::abs(count - e) < 4 * std::sqrt(e) + 1e-9, encode(shape));
    }
    int singles = census[CellSet{{0, 0}}];
    double e1 = double(n) * n * p * std::pow(1 - p, 4);
    CHECK(std::abs(singles - e1) < 4 * std::sqrt(e1));
}

TEST_CASE("perimeters") {
    CHECK(perimeter(CellSet{{0, 0}}) == 4);
    CHECK(perimeter(CellSet{{0, 0}, {1, 0}, {2, 0}}) == 8);
    CHECK(perimeter(CellSet{{0, 0}, {1, 0}, {0, 1}}) == 7);
    CHECK(perimeter(CellSet{{0, 0}, {1, 0}, {0, 1}, {1, 1}}) == 8);
}

TEST_CASE("containment of small seeds") {
    auto hat = containment_experiment(SeedSpecies::Hat4, 1, 300, 5);
    CHECK(hat.trials == 300);
    CHECK(hat.escapes == 0);
    CHECK(hat.radius == 6);
    CHECK(containment_experiment(SeedSpecies::Line3, 0, 300, 6).escapes == 0);
    CHECK_THROWS_AS(containment_experiment(SeedSpecies::Square4, 0, 10, 1, {}, 3), EscapedWindow);
}

TEST_CASE("plots are deterministic") {
    SweepSpec spec;
    spec.n = 20;
    spec.p_values = {0.2, 0.6};
    spec.replicates = 3;
    PlotSpec ps;
    ps.csv_text = sweep_csv(sweep(spec, 1).records);
    ps.curves = {TheoryCurve::TorusLarge};
    ps.title = "test";
    auto a = render_plot(ps), b = render_plot(ps);
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("TorusLarge") != std::string::npos);
    PlotSpec empty;
    empty.csv_text = "p,n,rep,seed,r_f,rounds,status\n";
    CHECK_THROWS(render_plot(empty));
}

}  // TEST_SUITE
