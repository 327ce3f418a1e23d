#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "spots/analysis.hpp"
#include "spots/engines.hpp"
#include "spots/grundy_db.hpp"
#include "spots/proof_number.hpp"
#include "spots/sprouts.hpp"
#include "spots/transport.hpp"

namespace py = pybind11;
using namespace spots;

namespace {

py::dict stats_dict(const SearchStats& s) {
    py::dict d;
    d["outcome"] = to_string(s.outcome);
    d["wall_time_seconds"] = s.wall_time_seconds;
    d["expansions"] = s.expansions;
    d["peak_nodes"] = s.peak_nodes;
    d["tt_entries_peak"] = s.tt_entries_peak;
    d["gn_count"] = s.gn_count;
    d["invariant_violations"] = s.invariant_violations;
    if (s.search_overhead) d["search_overhead"] = *s.search_overhead;
    if (s.worker_utilization) d["worker_utilization"] = *s.worker_utilization;
    return d;
}

EngineOptions make_options(std::size_t tt_capacity, unsigned threads, unsigned workers, unsigned grouping,
                           std::uint64_t iterations, std::uint64_t updates, std::uint64_t budget, bool check_invariants) {
    EngineOptions o;
    o.search.tt_capacity = tt_capacity;
    o.search.threads = threads;
    o.search.budget = budget;
    o.search.check_invariants = check_invariants;
    o.cluster.workers = workers;
    o.cluster.grouping = grouping;
    o.cluster.iterations = iterations;
    o.cluster.updates = updates;
    o.cluster.threads = threads;
    o.cluster.tt_capacity = tt_capacity;
    return o;
}

}  // namespace

PYBIND11_MODULE(_spots, m) {
    m.doc() = "Sprouts and Nim solvers: proof-number searches with Grundy numbers";

    py::register_exception<BudgetExceeded>(m, "BudgetExceeded");
    py::register_exception<SyntaxError>(m, "SyntaxError", PyExc_ValueError);
    py::register_exception<GrundyConflict>(m, "GrundyConflict");
    py::register_exception<proto::ProtocolError>(m, "ProtocolError", PyExc_ValueError);

    py::class_<GrundyDatabase>(m, "GrundyDatabase")
        .def(py::init<>())
        .def("insert", &GrundyDatabase::insert, py::arg("key"), py::arg("value"))
        .def("find", [](const GrundyDatabase& db, const std::string& key) { return db.find(key); })
        .def("__len__", &GrundyDatabase::size)
        .def("entries",
             [](const GrundyDatabase& db) {
                 std::vector<std::pair<std::string, NimValue>> out;
                 for (const auto& e : db.sorted_entries()) out.emplace_back(e.key, e.value);
                 return out;
             })
        .def("save", [](const GrundyDatabase& db, const std::string& path) { db.save(path); })
        .def("load", [](GrundyDatabase& db, const std::string& path) { db.load(path); })
        .def("dumps", [](const GrundyDatabase& db) {
            std::ostringstream out;
            db.write(out);
            return out.str();
        });

    m.def(
        "canonical",
        [](const std::string& game, const std::string& position) { return make_game(game)->parse(position); },
        py::arg("game"), py::arg("position"), "Canonical key of a position.");
    m.def(
        "children",
        [](const std::string& game, const std::string& position) {
            auto g = make_game(game);
            return g->children(g->parse(position));
        },
        py::arg("game"), py::arg("position"));
    m.def(
        "decompose",
        [](const std::string& game, const std::string& position) {
            auto g = make_game(game);
            return g->decompose(g->parse(position));
        },
        py::arg("game"), py::arg("position"));

    m.def(
        "solve",
        [](const std::string& position, const std::string& game, const std::string& engine, NimValue nim,
           GrundyDatabase* db, std::size_t tt_capacity, unsigned threads, unsigned workers, unsigned grouping,
           std::uint64_t iterations, std::uint64_t updates, std::uint64_t budget, bool check_invariants) {
            auto g = make_game(game);
            const Couple root{g->parse(position), nim};
            const auto opts =
                make_options(tt_capacity, threads, workers, grouping, iterations, updates, budget, check_invariants);
            const Engine e = parse_engine(engine);
            GrundyDatabase scratch;
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve_couple(e, root, *g, db ? *db : scratch, opts);
            }
            return py::make_tuple(to_string(r.outcome), stats_dict(r.stats));
        },
        py::arg("position"), py::arg("game") = "sprouts", py::arg("engine") = "dfpn", py::arg("nim") = 0,
        py::arg("db") = nullptr, py::arg("tt_capacity") = 1'000'000, py::arg("threads") = 1, py::arg("workers") = 1,
        py::arg("grouping") = 1, py::arg("iterations") = 10'000, py::arg("updates") = 1'000, py::arg("budget") = 0,
        py::arg("check_invariants") = false,
        "Solve position + *nim. Returns ('win' | 'loss', stats).");

    m.def(
        "grundy",
        [](const std::string& position, const std::string& game, const std::string& engine, GrundyDatabase* db) {
            auto g = make_game(game);
            GrundyDatabase scratch;
            py::gil_scoped_release release;
            return solve_grundy(parse_engine(engine), g->parse(position), *g, db ? *db : scratch,
                                make_options(1'000'000, 4, 2, 1, 2000, 500, 0, false));
        },
        py::arg("position"), py::arg("game") = "sprouts", py::arg("engine") = "dfpn", py::arg("db") = nullptr);

    m.def(
        "estimate",
        [](const std::string& position, const std::string& game, std::size_t samples, const std::string& mode,
           std::uint64_t seed, std::optional<double> expected_gn) {
            auto g = make_game(game);
            const auto key = g->parse(position);
            ComplexityEstimate e = mode == "gn" ? estimate_gn(*g, key, samples, seed, expected_gn.value_or(1))
                                                : estimate_plain(*g, key, samples, seed);
            return py::make_tuple(e.mean, e.dispersion);
        },
        py::arg("position"), py::arg("game") = "sprouts", py::arg("samples") = 1000, py::arg("mode") = "plain",
        py::arg("seed") = 0, py::arg("expected_gn") = py::none(), "Returns (mean, dispersion).");

    m.def(
        "verify",
        [](const GrundyDatabase& db, const std::string& game) {
            const auto r = verify_certificate(db, *make_game(game));
            py::dict d;
            d["passed"] = r.passed();
            d["checked"] = r.checked;
            d["failures"] = r.failures;
            d["missing_dependencies"] = r.missing_dependencies;
            return d;
        },
        py::arg("db"), py::arg("game") = "sprouts");
}
