#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "spots/cluster.hpp"
#include "spots/nim.hpp"
#include "spots/oracle.hpp"
#include "spots/sprouts.hpp"

using namespace spots;

TEST_CASE("config validation") {
    ClusterConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.iterations = 5;
    cfg.updates = 10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("gn sync hands out each entry once") {
    GrundyDatabase db;
    std::size_t cursor = 0;
    db.insert("a", 1);
    db.insert("b", 0);
    CHECK(gn_sync_delta(db, cursor).size() == 2);
    CHECK(gn_sync_delta(db, cursor).empty());
    db.insert("c", 2);
    const auto d = gn_sync_delta(db, cursor);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == GrundyEntry{"c", 2});
}

TEST_CASE("a job reports progress every update period, then finishes") {
    sprouts::SproutsGame g;
    ClusterConfig cfg;
    WorkerGroup group(0);
    auto [master, worker] = proto::make_channel_pair();
    std::thread t([&, ep = worker.get()] { worker_run(*ep, g, cfg, 3, group); });

    auto hello = master->receive();
    REQUIRE(hello);
    CHECK(std::get<proto::Hello>(*hello) == proto::Hello{3, 0, 1});
    proto::Job job;
    job.job_id = 11;
    job.couple = Couple{g.parse("0*7"), 0};
    job.iterations = 100;
    job.updates = 10;
    master->send(proto::Assign{job});
    int progress = 0;
    proto::Done done;
    for (;;) {
        auto m = master->receive();
        REQUIRE(m);
        if (auto* p = std::get_if<proto::Progress>(&*m)) {
            CHECK(p->job_id == 11);
            CHECK(p->iterations_done == 10u * static_cast<unsigned>(++progress));
            continue;
        }
        done = std::get<proto::Done>(*m);
        break;
    }
    CHECK(progress == 10);
    CHECK(done.job_id == 11);
    CHECK(done.status == proto::JobStatus::kBudgetExhausted);
    CHECK(done.iterations_done == 100);
    CHECK(done.children.size() == g.children(job.couple.position).size());
    master->send(proto::Shutdown{});
    t.join();
}

TEST_CASE("in-process cluster on Nim agrees with Bouton") {
    NimGame nim;
    ClusterConfig cfg;
    cfg.workers = 3;
    cfg.grouping = 2;
    cfg.iterations = 20;
    cfg.updates = 5;
    for (const auto& heaps : std::vector<std::vector<unsigned>>{{1, 2, 3}, {2, 5}, {4}, {1, 1, 4, 5}, {3, 3}}) {
        GrundyDatabase db;
        const auto r = run_local_cluster(Couple{nim.parse(testing::heaps_text(heaps)), 0}, nim, cfg, db);
        CHECK((r.result.outcome == Outcome::kLoss) == (testing::bouton(heaps) == 0));
        CHECK(r.double_assignments == 0);
        CHECK(r.locked_at_end == 0);
        for (const auto& e : db.sorted_entries()) CHECK(e.value == testing::bouton(NimGame::heaps(e.key)));
    }
}

TEST_CASE("cluster shapes agree on the small Sprouts starts") {
    sprouts::SproutsGame g;
    const Outcome expected[] = {Outcome::kLoss, Outcome::kLoss, Outcome::kWin, Outcome::kWin, Outcome::kWin,
                                Outcome::kLoss};
    const std::pair<unsigned, unsigned> shapes[] = {{1, 1}, {2, 1}, {4, 2}};
    for (auto [workers, grouping] : shapes)
        for (int n = 1; n <= 6; ++n) {
            ClusterConfig cfg;
            cfg.workers = workers;
            cfg.grouping = grouping;
            cfg.iterations = 500;
            cfg.updates = 100;
            GrundyDatabase db;
            const auto r = run_local_cluster(Couple{g.parse("0*" + std::to_string(n)), 0}, g, cfg, db);
            CHECK_MESSAGE(r.result.outcome == expected[n - 1], workers << "x" << grouping << " n " << n);
            CHECK(r.locked_at_end == 0);
            CHECK(r.double_assignments == 0);
        }
}

TEST_CASE("Grundy numbers found by a group reach the master") {
    sprouts::SproutsGame g;
    ClusterConfig cfg;
    cfg.workers = 2;
    cfg.grouping = 2;
    cfg.iterations = 300;
    cfg.updates = 50;
    GrundyDatabase db;
    run_local_cluster(Couple{g.parse("0*5"), 0}, g, cfg, db);
    CHECK(db.size() > 0);
    Oracle oracle(g);
    for (const auto& e : db.sorted_entries()) CHECK(oracle.grundy(e.key) == e.value);
}

TEST_CASE("cluster over TCP gives the in-process answers") {
    sprouts::SproutsGame g;
    ClusterConfig cfg;
    cfg.workers = 2;
    cfg.iterations = 300;
    cfg.updates = 100;
    for (int n : {3, 5, 6}) {
        const Couple root{g.parse("0*" + std::to_string(n)), 0};
        GrundyDatabase local_db;
        const auto local = run_local_cluster(root, g, cfg, local_db);

        proto::TcpListener listener("127.0.0.1", 0);
        WorkerGroup g0(0), g1(1);
        std::thread w0([&] { worker_run(*proto::tcp_connect("127.0.0.1", listener.port()), g, cfg, 0, g0); });
        std::thread w1([&] { worker_run(*proto::tcp_connect("127.0.0.1", listener.port()), g, cfg, 1, g1); });
        std::vector<std::unique_ptr<proto::Endpoint>> eps;
        eps.push_back(listener.accept());
        eps.push_back(listener.accept());
        GrundyDatabase db;
        const auto tcp = master_run(root, g, cfg, std::move(eps), db);
        w0.join();
        w1.join();
        CHECK(tcp.result.outcome == local.result.outcome);
        CHECK(tcp.locked_at_end == 0);
    }
}

TEST_CASE("a vanished worker is reported") {
    sprouts::SproutsGame g;
    ClusterConfig cfg;
    cfg.iterations = 10;
    cfg.updates = 5;
    auto [master, worker] = proto::make_channel_pair();
    std::thread t([ep = std::move(worker)] {
        ep->send(proto::Hello{0, 0, 1});
        ep->receive();  // the job
        ep->close();
    });
    std::vector<std::unique_ptr<proto::Endpoint>> eps;
    eps.push_back(std::move(master));
    GrundyDatabase db;
    CHECK_THROWS_AS(master_run(Couple{g.parse("0*6"), 0}, g, cfg, std::move(eps), db), WorkerLost);
    t.join();
}
