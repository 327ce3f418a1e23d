#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "spots/analysis.hpp"
#include "spots/cluster.hpp"
#include "spots/engines.hpp"
#include "spots/transport.hpp"

namespace spots::cli {

using nlohmann::json;

namespace {

struct Common {
    std::string game = "sprouts";
    std::string position;
    NimValue nim = 0;
    std::string engine = "dfpn";
    std::size_t tt_capacity = 1'000'000;
    unsigned threads = 1;
    unsigned workers = 1;
    std::uint64_t iterations = 10'000;
    std::uint64_t updates = 1'000;
    unsigned grouping = 1;
    bool heuristic = false;
    std::uint64_t seed = 0;
    std::string gn_in;
    std::string gn_out;
    std::uint64_t budget = 0;
    std::string stats_out;
    bool check_invariants = false;
};

void add_search_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--game", c.game, "sprouts or nim")->check(CLI::IsMember({"sprouts", "nim"}));
    cmd->add_option("--position", c.position, "position notation, e.g. 0*5 or 1,2,3")->required();
    cmd->add_option("--nim", c.nim, "size of an extra Nim heap added to the position");
    cmd->add_option("--tt-capacity", c.tt_capacity, "transposition table entries");
    cmd->add_option("--threads", c.threads, "search threads (pdfpn) or per worker (cluster)");
    cmd->add_option("--workers", c.workers, "cluster workers");
    cmd->add_option("--iterations", c.iterations, "expansions per cluster job");
    cmd->add_option("--updates", c.updates, "expansions between progress reports");
    cmd->add_option("--grouping", c.grouping, "workers sharing one Grundy database");
    cmd->add_flag("--heuristic", c.heuristic, "order tied children by the game heuristic");
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--gn-db-in,--gn-db", c.gn_in, "Grundy database to start from");
    cmd->add_option("--gn-db-out", c.gn_out, "where to write the Grundy database (certificate)");
    cmd->add_option("--budget", c.budget, "expansion budget, 0 for none");
    cmd->add_option("--stats-out", c.stats_out, "append the stats record to this file");
    cmd->add_flag("--check-invariants", c.check_invariants, "count threshold and equation violations");
}

EngineOptions engine_options(const Common& c) {
    EngineOptions o;
    o.search.budget = c.budget;
    o.search.tt_capacity = c.tt_capacity;
    o.search.threads = c.threads;
    o.search.seed = c.seed;
    o.search.check_invariants = c.check_invariants;
    if (c.heuristic) o.search.tie_break = TieBreak::kHeuristic;
    o.cluster.workers = c.workers;
    o.cluster.iterations = c.iterations;
    o.cluster.updates = c.updates;
    o.cluster.grouping = c.grouping;
    o.cluster.threads = c.threads;
    o.cluster.tt_capacity = c.tt_capacity;
    o.cluster.seed = c.seed;
    o.cluster.heuristic = c.heuristic;
    return o;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stats_record(const SearchStats& s, const Common& c, const std::string& key) {
    json r;
    r["outcome"] = to_string(s.outcome);
    r["wall_time_seconds"] = s.wall_time_seconds;
    r["expansions"] = s.expansions;
    r["peak_nodes"] = s.peak_nodes;
    r["tt_entries_peak"] = s.tt_entries_peak;
    r["gn_count"] = s.gn_count;
    r["invariant_violations"] = s.invariant_violations;
    r["search_overhead"] = optional_number(s.search_overhead);
    r["worker_utilization"] = optional_number(s.worker_utilization);
    r["config"] = {{"game", c.game},       {"position", key},           {"nim", c.nim},
                   {"engine", c.engine},   {"tt_capacity", c.tt_capacity}, {"threads", c.threads},
                   {"workers", c.workers}, {"iterations", c.iterations}, {"updates", c.updates},
                   {"grouping", c.grouping}, {"heuristic", c.heuristic}, {"seed", c.seed},
                   {"budget", c.budget}};
    return r;
}

void emit_stats(const json& record, const std::string& path, std::ostream& err) {
    if (path.empty()) {
        err << record.dump() << '\n';
        return;
    }
    std::ofstream f(path, std::ios::app);
    if (!f) throw std::runtime_error("cannot open stats file '" + path + "'");
    f << record.dump() << '\n';
}

bool log_enabled() {
    const char* v = std::getenv("SPOTS_LOG");
    return v && *v && std::string(v) != "0" && std::string(v) != "off";
}

void log(std::ostream& err, const std::string& line) {
    if (log_enabled()) err << "[spots] " << line << '\n';
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("endpoint", "expected host:port, got '" + s + "'");
    const int port = std::stoi(s.substr(colon + 1));
    if (port < 0 || port > 65535) throw CLI::ValidationError("endpoint", "port out of range");
    return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

void load_db(GrundyDatabase& db, const std::string& path) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path)) throw std::runtime_error("no such file '" + path + "'");
    db.load(path);
}

int cmd_solve(const Common& c, bool grundy, std::ostream& out, std::ostream& err) {
    auto game = make_game(c.game);
    const Engine engine = parse_engine(c.engine);
    const PositionKey key = game->parse(c.position);
    GrundyDatabase db;
    load_db(db, c.gn_in);
    const EngineOptions options = engine_options(c);
    try {
        if (grundy) {
            const auto start = std::chrono::steady_clock::now();
            const NimValue g = solve_grundy(engine, key, *game, db, options);
            out << g << '\n';
            SearchStats s;
            s.outcome = g ? Outcome::kWin : Outcome::kLoss;
            s.gn_count = db.size();
            s.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            json record = stats_record(s, c, key);
            record["grundy"] = g;
            emit_stats(record, c.stats_out, err);
        } else {
            const SolveResult r = solve_couple(engine, Couple{key, c.nim}, *game, db, options);
            out << to_string(r.outcome) << '\n';
            emit_stats(stats_record(r.stats, c, key), c.stats_out, err);
        }
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << '\n';
        if (!c.gn_out.empty()) db.save(c.gn_out);
        return kBudget;
    }
    if (!c.gn_out.empty()) db.save(c.gn_out);
    return kOk;
}

int cmd_estimate(const std::string& game_name, const std::string& position, std::size_t samples,
                 const std::string& mode, std::uint64_t seed, std::optional<double> expected_gn, const std::string& gn_in,
                 std::ostream& out) {
    auto game = make_game(game_name);
    const PositionKey key = game->parse(position);
    ComplexityEstimate e;
    json r;
    if (mode == "plain") {
        e = estimate_plain(*game, key, samples, seed);
    } else {
        GrundyDatabase db;
        load_db(db, gn_in);
        const double g = expected_gn ? *expected_gn : default_expected_gn(db);
        e = estimate_gn(*game, key, samples, seed, g);
        r["expected_gn"] = g;
    }
    r["mode"] = mode;
    r["game"] = game_name;
    r["position"] = key;
    r["seed"] = seed;
    r["samples"] = e.samples;
    r["mean"] = e.mean;
    r["dispersion"] = e.dispersion;
    out << r.dump() << '\n';
    return kOk;
}

int cmd_verify(const std::string& game_name, const std::string& path, std::ostream& out) {
    auto game = make_game(game_name);
    GrundyDatabase db;
    load_db(db, path);
    const auto report = verify_certificate(db, *game);
    json r;
    r["checked"] = report.checked;
    r["passed"] = report.passed();
    json failures = json::array();
    for (const auto& [key, why] : report.failures) failures.push_back({{"key", key}, {"reason", why}});
    r["failures"] = std::move(failures);
    r["missing_dependencies"] = report.missing_dependencies;
    out << r.dump() << '\n';
    return report.passed() ? kOk : kVerifyFailed;
}

int cmd_master(const Common& c, const std::string& listen, std::ostream& out, std::ostream& err) {
    auto game = make_game(c.game);
    const PositionKey key = game->parse(c.position);
    const auto [host, port] = split_endpoint(listen);
    EngineOptions o = engine_options(c);
    o.cluster.validate();
    GrundyDatabase db;
    load_db(db, c.gn_in);
    proto::TcpListener listener(host, port);
    log(err, "listening on " + host + ":" + std::to_string(listener.port()));
    std::vector<std::unique_ptr<proto::Endpoint>> endpoints;
    for (unsigned i = 0; i < o.cluster.workers; ++i) {
        endpoints.push_back(listener.accept());
        log(err, "worker connection " + std::to_string(i + 1) + "/" + std::to_string(o.cluster.workers));
    }
    const auto report = master_run(Couple{key, c.nim}, *game, o.cluster, std::move(endpoints), db);
    out << to_string(report.result.outcome) << '\n';
    Common echo = c;
    echo.engine = "cluster";
    json record = stats_record(report.result.stats, echo, key);
    record["jobs"] = report.jobs;
    emit_stats(record, c.stats_out, err);
    if (!c.gn_out.empty()) db.save(c.gn_out);
    return kOk;
}

int cmd_worker(const std::string& game_name, const std::string& connect, unsigned threads, unsigned group,
               unsigned count, unsigned first_id, std::size_t tt_capacity, int timeout_ms, bool heuristic,
               std::ostream& err) {
    auto game = make_game(game_name);
    const auto [host, port] = split_endpoint(connect);
    ClusterConfig cfg;
    cfg.threads = threads;
    cfg.tt_capacity = tt_capacity;
    cfg.heuristic = heuristic;
    WorkerGroup shared(group);
    std::vector<std::unique_ptr<proto::Endpoint>> endpoints;
    for (unsigned i = 0; i < count; ++i) endpoints.push_back(proto::tcp_connect(host, port, timeout_ms));
    log(err, "connected " + std::to_string(count) + " worker session(s) to " + connect);
    std::vector<std::thread> sessions;
    std::vector<std::exception_ptr> errors(count);
    for (unsigned i = 0; i < count; ++i)
        sessions.emplace_back([&, i] {
            try {
                worker_run(*endpoints[i], *game, cfg, first_id + i, shared);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    for (auto& t : sessions) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Proof-number search solver for impartial games"};
    app.require_subcommand(1);

    Common solve;
    auto* solve_cmd = app.add_subcommand("solve", "solve P + *n and print win or loss");
    add_search_flags(solve_cmd, solve);
    solve_cmd->add_option("--engine", solve.engine)->check(CLI::IsMember({"oracle", "pns", "dfpn", "pdfpn", "cluster"}));

    Common grundy;
    auto* grundy_cmd = app.add_subcommand("grundy", "compute the Grundy number of a position");
    add_search_flags(grundy_cmd, grundy);
    grundy_cmd->add_option("--engine", grundy.engine)->check(CLI::IsMember({"oracle", "pns", "dfpn", "pdfpn", "cluster"}));

    std::string est_game = "sprouts", est_position, est_mode = "plain", est_gn;
    std::size_t est_samples = 1000;
    std::uint64_t est_seed = 0;
    std::optional<double> est_expected;
    auto* est_cmd = app.add_subcommand("estimate", "estimate game-tree size by random sampling");
    est_cmd->add_option("--game", est_game)->check(CLI::IsMember({"sprouts", "nim"}));
    est_cmd->add_option("--position", est_position)->required();
    est_cmd->add_option("--samples", est_samples)->check(CLI::PositiveNumber);
    est_cmd->add_option("--mode", est_mode)->check(CLI::IsMember({"plain", "gn"}));
    est_cmd->add_option("--seed", est_seed);
    est_cmd->add_option("--expected-gn", est_expected, "Grundy value assumed behind Grundy nodes");
    est_cmd->add_option("--gn-db-in,--gn-db", est_gn, "database whose mean value sets --expected-gn");

    std::string ver_game = "sprouts", ver_path;
    auto* ver_cmd = app.add_subcommand("verify", "check a Grundy database against the mex rule");
    ver_cmd->add_option("--game", ver_game)->check(CLI::IsMember({"sprouts", "nim"}));
    ver_cmd->add_option("--gn-db", ver_path)->required();

    Common master;
    std::string listen = "127.0.0.1:7821";
    auto* master_cmd = app.add_subcommand("master", "run the cluster master over TCP");
    add_search_flags(master_cmd, master);
    master_cmd->add_option("--listen", listen, "host:port");

    std::string w_game = "sprouts", w_connect = "127.0.0.1:7821";
    unsigned w_threads = 1, w_group = 0, w_count = 1, w_id = 0;
    std::size_t w_tt = 1'000'000;
    int w_timeout = 10'000;
    bool w_heuristic = false;
    auto* worker_cmd = app.add_subcommand("worker", "serve cluster jobs over TCP");
    worker_cmd->add_option("--game", w_game)->check(CLI::IsMember({"sprouts", "nim"}));
    worker_cmd->add_option("--connect", w_connect, "host:port");
    worker_cmd->add_option("--threads", w_threads)->check(CLI::PositiveNumber);
    worker_cmd->add_option("--group", w_group, "group id; sessions of one process share its database");
    worker_cmd->add_option("--count", w_count, "worker sessions in this process")->check(CLI::PositiveNumber);
    worker_cmd->add_option("--worker-id", w_id, "id of the first session");
    worker_cmd->add_option("--tt-capacity", w_tt);
    worker_cmd->add_option("--connect-timeout", w_timeout, "milliseconds to keep retrying");
    worker_cmd->add_flag("--heuristic", w_heuristic);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*solve_cmd) return cmd_solve(solve, false, out, err);
        if (*grundy_cmd) return cmd_solve(grundy, true, out, err);
        if (*est_cmd) return cmd_estimate(est_game, est_position, est_samples, est_mode, est_seed, est_expected, est_gn, out);
        if (*ver_cmd) return cmd_verify(ver_game, ver_path, out);
        if (*master_cmd) return cmd_master(master, listen, out, err);
        if (*worker_cmd)
            return cmd_worker(w_game, w_connect, w_threads, w_group, w_count, w_id, w_tt, w_timeout, w_heuristic, err);
    } catch (const SyntaxError& e) {
        err << "error: cannot parse position: " << e.what() << '\n';
        return kUsage;
    } catch (const FormatError& e) {
        err << "error: bad Grundy database: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace spots::cli
