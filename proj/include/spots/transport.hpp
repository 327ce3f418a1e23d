#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "spots/game.hpp"
#include "spots/grundy_db.hpp"
#include "spots/proof_number.hpp"

namespace spots::proto {

inline constexpr std::string_view kVersion = "spots-proto-1";
inline constexpr std::size_t kMaxFrame = std::size_t{64} << 20;
inline constexpr std::size_t kMaxDelta = 10'000;

using GnDelta = std::vector<GrundyEntry>;

struct Hello {
    std::uint32_t worker_id = 0;
    std::uint32_t group_id = 0;
    std::uint32_t threads = 1;
    friend bool operator==(const Hello&, const Hello&) = default;
};

struct Job {
    std::uint64_t job_id = 0;
    Couple couple;
    std::uint64_t iterations = 1;  // expansion budget
    std::uint64_t updates = 1;     // expansions between progress reports
    GnDelta gn_delta;
    friend bool operator==(const Job&, const Job&) = default;
};

struct Assign {
    Job job;
    friend bool operator==(const Assign&, const Assign&) = default;
};

struct Progress {
    std::uint64_t job_id = 0;
    ProofNumbers numbers;
    std::uint64_t iterations_done = 0;
    GnDelta gn_delta;
    friend bool operator==(const Progress&, const Progress&) = default;
};

enum class JobStatus { kSolved, kBudgetExhausted };

struct ChildNumbers {
    std::string key;  // couple key
    ProofNumbers numbers;
    friend bool operator==(const ChildNumbers&, const ChildNumbers&) = default;
};

struct Done {
    std::uint64_t job_id = 0;
    JobStatus status = JobStatus::kBudgetExhausted;
    ProofNumbers numbers;
    std::uint64_t iterations_done = 0;
    std::vector<ChildNumbers> children;
    GnDelta gn_delta;
    friend bool operator==(const Done&, const Done&) = default;
};

struct Shutdown {
    friend bool operator==(const Shutdown&, const Shutdown&) = default;
};

using Message = std::variant<Hello, Assign, Progress, Done, Shutdown>;

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(std::size_t offset, const std::string& reason)
        : std::runtime_error("protocol error at byte " + std::to_string(offset) + ": " + reason),
          offset_(offset), reason_(reason) {}
    std::size_t offset() const { return offset_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t offset_;
    std::string reason_;
};

class TransportClosed : public std::runtime_error {
public:
    TransportClosed() : std::runtime_error("connection closed") {}
};

/// One JSON object terminated by '\n'.
std::string encode(const Message& m);
/// Accepts a frame with or without its trailing newline.
Message decode(std::string_view frame);

/// Frames for `m`; Grundy deltas longer than kMaxDelta are spread over
/// several frames, all but the last flagged "more".
std::vector<std::string> encode_frames(const Message& m);

/// One side of a connection. Sends are thread-safe; a single reader.
class Endpoint {
public:
    virtual ~Endpoint() = default;

    void send(const Message& m);
    /// Blocks for the next message; nullopt once the peer is gone.
    std::optional<Message> receive();
    virtual void close() = 0;

protected:
    virtual void write_frame(const std::string& frame) = 0;
    virtual std::optional<std::string> read_frame() = 0;

private:
    std::mutex send_mutex_;
    GnDelta pending_;
};

/// Connected in-process endpoints. Messages still go through encode/decode.
std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> make_channel_pair();

class TcpListener {
public:
    /// Port 0 picks a free port.
    TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    std::unique_ptr<Endpoint> accept();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Retries for up to `timeout_ms` while the listener is not up yet.
std::unique_ptr<Endpoint> tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms = 10'000);

/// Blocking FIFO that many producers feed and one consumer drains.
template <typename T>
class Mailbox {
public:
    void push(T item) {
        {
            std::lock_guard lock(mutex_);
            items_.push_back(std::move(item));
        }
        cv_.notify_one();
    }
    T pop() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !items_.empty(); });
        T item = std::move(items_.front());
        items_.pop_front();
        return item;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> items_;
};

}  // namespace spots::proto
