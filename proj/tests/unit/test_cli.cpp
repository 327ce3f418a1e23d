#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "spots/transport.hpp"

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = spots::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("spots_cli_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("solve prints the outcome and a stats record") {
    auto r = run({"solve", "--position", "0*3"});
    CHECK(r.code == spots::cli::kOk);
    CHECK(r.out == "win\n");
    const auto stats = nlohmann::json::parse(r.err.substr(r.err.rfind("\n{") + 1));
    CHECK(stats["outcome"] == "win");
    CHECK(stats.contains("expansions"));
    CHECK(stats.contains("peak_nodes"));
    CHECK(stats.contains("config"));

    CHECK(run({"solve", "--game", "nim", "--position", "1,2,3", "--engine", "oracle"}).out == "loss\n");
    CHECK(run({"solve", "--game", "nim", "--position", "1,2", "--nim", "3", "--engine", "pns"}).out == "loss\n");
    CHECK(run({"solve", "--position", "0*4", "--engine", "pdfpn", "--threads", "2"}).out == "win\n");
    CHECK(run({"solve", "--position", "0*4", "--engine", "cluster", "--workers", "2", "--iterations", "100",
               "--updates", "10"})
              .out == "win\n");
}

TEST_CASE("exit codes") {
    CHECK(run({"solve", "--position", "0*7", "--budget", "100"}).code == spots::cli::kBudget);
    CHECK(run({"solve", "--position", "0*x"}).code == spots::cli::kUsage);
    CHECK(run({"solve", "--position", "0*3", "--engine", "magic"}).code == spots::cli::kUsage);
    CHECK(run({"frobnicate"}).code == spots::cli::kUsage);
    CHECK(run({}).code == spots::cli::kUsage);
}

TEST_CASE("grundy subcommand") {
    CHECK(run({"grundy", "--position", "0*4"}).out == "1\n");
    CHECK(run({"grundy", "--game", "nim", "--position", "5"}).out == "5\n");
}

TEST_CASE("certificate written by solve verifies; a mutated one does not") {
    const auto cert = temp_file("cert.gn");
    const auto stats = temp_file("stats.jsonl");
    std::filesystem::remove(stats);
    auto r = run({"solve", "--position", "0*5", "--gn-db-out", cert.string(), "--stats-out", stats.string()});
    REQUIRE(r.code == 0);
    std::ifstream in(stats);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(nlohmann::json::parse(line)["outcome"] == "win");

    auto v = run({"verify", "--gn-db", cert.string()});
    CHECK(v.code == spots::cli::kOk);
    CHECK(nlohmann::json::parse(v.out)["passed"] == true);

    std::ifstream cin(cert);
    std::vector<std::string> lines;
    while (std::getline(cin, line)) lines.push_back(line);
    cin.close();
    REQUIRE(lines.size() > 1);
    CHECK(lines[0] == "#spots-gn-v1");
    // bump the value of the first record
    auto& rec = lines[1];
    const auto sep = rec.find_last_of(" \t");
    rec = rec.substr(0, sep + 1) + std::to_string(std::stoul(rec.substr(sep + 1)) + 1);
    const auto bad = temp_file("bad.gn");
    {
        std::ofstream o(bad);
        for (const auto& l : lines) o << l << '\n';
    }
    CHECK(run({"verify", "--gn-db", bad.string()}).code == spots::cli::kVerifyFailed);
    std::filesystem::remove(cert);
    std::filesystem::remove(bad);
    std::filesystem::remove(stats);
}

TEST_CASE("estimate is deterministic for a seed") {
    auto a = run({"estimate", "--position", "0*4", "--samples", "300", "--seed", "5"});
    auto b = run({"estimate", "--position", "0*4", "--samples", "300", "--seed", "5"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["mean"].get<double>() > 0);
    auto g = run({"estimate", "--position", "0*4", "--samples", "300", "--mode", "gn", "--expected-gn", "0"});
    CHECK(nlohmann::json::parse(g.out)["expected_gn"] == 0.0);
}

TEST_CASE("master and workers over TCP") {
    std::uint16_t port = 0;
    {
        spots::proto::TcpListener probe("127.0.0.1", 0);
        port = probe.port();
    }
    const std::string where = "127.0.0.1:" + std::to_string(port);
    Run master;
    std::thread m([&] {
        master = run({"master", "--position", "0*6", "--workers", "3", "--iterations", "300", "--updates", "100",
                      "--listen", where});
    });
    Run w1, w2;
    std::thread a([&] { w1 = run({"worker", "--connect", where, "--count", "2", "--group", "0"}); });
    std::thread b([&] { w2 = run({"worker", "--connect", where, "--group", "1", "--worker-id", "2"}); });
    m.join();
    a.join();
    b.join();
    CHECK(master.code == 0);
    CHECK(master.out == "loss\n");
    CHECK(w1.code == 0);
    CHECK(w2.code == 0);
}
