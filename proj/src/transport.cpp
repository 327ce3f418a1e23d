#include "spots/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <limits>
#include <thread>

#include "json.hpp"

namespace spots::proto {

using nlohmann::json;

namespace {

json pn_json(PnValue v) { return v.is_inf() ? json("inf") : json(v.value()); }

PnValue pn_from(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return kInf;
    if (!j.is_number_unsigned()) throw ProtocolError(0, "proof number must be a natural or \"inf\"");
    const auto v = j.get<std::uint64_t>();
    if (PnValue(v).is_inf()) throw ProtocolError(0, "finite proof number out of range");
    return v;
}

json delta_json(const GnDelta& d) {
    json a = json::array();
    for (const auto& e : d) a.push_back(json::array({e.key, e.value}));
    return a;
}

template <typename T>
T field(const json& o, const char* name) {
    auto it = o.find(name);
    if (it == o.end()) throw ProtocolError(0, std::string("missing field '") + name + "'");
    if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_unsigned() || it->template get<std::uint64_t>() > std::numeric_limits<T>::max())
            throw ProtocolError(0, std::string("bad field '") + name + "'");
    }
    try {
        return it->template get<T>();
    } catch (const json::exception&) {
        throw ProtocolError(0, std::string("bad field '") + name + "'");
    }
}

const json& member(const json& o, const char* name) {
    auto it = o.find(name);
    if (it == o.end()) throw ProtocolError(0, std::string("missing field '") + name + "'");
    return *it;
}

GnDelta delta_from(const json& o) {
    const json& a = member(o, "gn");
    if (!a.is_array()) throw ProtocolError(0, "gn must be an array");
    GnDelta d;
    d.reserve(a.size());
    for (const auto& e : a) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number_unsigned())
            throw ProtocolError(0, "bad gn entry");
        const auto v = e[1].get<std::uint64_t>();
        if (v > UINT32_MAX) throw ProtocolError(0, "Grundy number out of range");
        d.push_back({e[0].get<std::string>(), static_cast<NimValue>(v)});
    }
    return d;
}

ProofNumbers numbers_from(const json& o) { return {pn_from(member(o, "pn")), pn_from(member(o, "dn"))}; }

GnDelta* delta_of(Message& m) {
    return std::visit(
        [](auto& v) -> GnDelta* {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Assign>) return &v.job.gn_delta;
            else if constexpr (std::is_same_v<T, Progress> || std::is_same_v<T, Done>) return &v.gn_delta;
            else return nullptr;
        },
        m);
}

json to_json(const Message& m) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            json o;
            if constexpr (std::is_same_v<T, Hello>) {
                o["type"] = "hello";
                o["version"] = kVersion;
                o["worker_id"] = v.worker_id;
                o["group_id"] = v.group_id;
                o["threads"] = v.threads;
            } else if constexpr (std::is_same_v<T, Assign>) {
                o["type"] = "assign";
                o["job_id"] = v.job.job_id;
                o["position"] = v.job.couple.position;
                o["nim"] = v.job.couple.nim;
                o["iterations"] = v.job.iterations;
                o["updates"] = v.job.updates;
                o["gn"] = delta_json(v.job.gn_delta);
            } else if constexpr (std::is_same_v<T, Progress>) {
                o["type"] = "progress";
                o["job_id"] = v.job_id;
                o["pn"] = pn_json(v.numbers.pn);
                o["dn"] = pn_json(v.numbers.dn);
                o["iterations_done"] = v.iterations_done;
                o["gn"] = delta_json(v.gn_delta);
            } else if constexpr (std::is_same_v<T, Done>) {
                o["type"] = "done";
                o["job_id"] = v.job_id;
                o["status"] = v.status == JobStatus::kSolved ? "solved" : "budget_exhausted";
                o["pn"] = pn_json(v.numbers.pn);
                o["dn"] = pn_json(v.numbers.dn);
                o["iterations_done"] = v.iterations_done;
                json kids = json::array();
                for (const auto& c : v.children)
                    kids.push_back(json::array({c.key, pn_json(c.numbers.pn), pn_json(c.numbers.dn)}));
                o["children"] = std::move(kids);
                o["gn"] = delta_json(v.gn_delta);
            } else {
                o["type"] = "shutdown";
            }
            return o;
        },
        m);
}

Message from_json(const json& o) {
    if (!o.is_object()) throw ProtocolError(0, "frame is not an object");
    const auto type = field<std::string>(o, "type");
    if (type == "hello") {
        if (field<std::string>(o, "version") != kVersion) throw ProtocolError(0, "unsupported protocol version");
        return Hello{field<std::uint32_t>(o, "worker_id"), field<std::uint32_t>(o, "group_id"),
                     field<std::uint32_t>(o, "threads")};
    }
    if (type == "assign") {
        Assign a;
        a.job.job_id = field<std::uint64_t>(o, "job_id");
        a.job.couple.position = field<std::string>(o, "position");
        a.job.couple.nim = field<NimValue>(o, "nim");
        a.job.iterations = field<std::uint64_t>(o, "iterations");
        a.job.updates = field<std::uint64_t>(o, "updates");
        a.job.gn_delta = delta_from(o);
        return a;
    }
    if (type == "progress") {
        Progress p;
        p.job_id = field<std::uint64_t>(o, "job_id");
        p.numbers = numbers_from(o);
        p.iterations_done = field<std::uint64_t>(o, "iterations_done");
        p.gn_delta = delta_from(o);
        return p;
    }
    if (type == "done") {
        Done d;
        d.job_id = field<std::uint64_t>(o, "job_id");
        const auto status = field<std::string>(o, "status");
        if (status == "solved") d.status = JobStatus::kSolved;
        else if (status == "budget_exhausted") d.status = JobStatus::kBudgetExhausted;
        else throw ProtocolError(0, "unknown job status '" + status + "'");
        d.numbers = numbers_from(o);
        d.iterations_done = field<std::uint64_t>(o, "iterations_done");
        const json& kids = member(o, "children");
        if (!kids.is_array()) throw ProtocolError(0, "children must be an array");
        for (const auto& c : kids) {
            if (!c.is_array() || c.size() != 3 || !c[0].is_string()) throw ProtocolError(0, "bad child entry");
            d.children.push_back({c[0].get<std::string>(), {pn_from(c[1]), pn_from(c[2])}});
        }
        d.gn_delta = delta_from(o);
        return d;
    }
    if (type == "shutdown") return Shutdown{};
    throw ProtocolError(0, "unknown message type '" + type + "'");
}

bool has_more(const json& o) {
    auto it = o.find("more");
    return it != o.end() && it->is_boolean() && it->get<bool>();
}

}  // namespace

std::string encode(const Message& m) { return to_json(m).dump() + '\n'; }

Message decode(std::string_view frame) {
    if (frame.size() > kMaxFrame) throw ProtocolError(kMaxFrame, "frame larger than 64 MiB");
    if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
    json o;
    try {
        o = json::parse(frame);
    } catch (const json::parse_error& e) {
        throw ProtocolError(e.byte, e.what());
    }
    return from_json(o);
}

std::vector<std::string> encode_frames(const Message& m) {
    Message copy = m;
    GnDelta* delta = delta_of(copy);
    if (!delta || delta->size() <= kMaxDelta) return {encode(m)};
    GnDelta all = std::move(*delta);
    std::vector<std::string> frames;
    for (std::size_t start = 0; start < all.size(); start += kMaxDelta) {
        const std::size_t end = std::min(all.size(), start + kMaxDelta);
        delta->assign(all.begin() + static_cast<std::ptrdiff_t>(start), all.begin() + static_cast<std::ptrdiff_t>(end));
        json o = to_json(copy);
        if (end < all.size()) o["more"] = true;
        frames.push_back(o.dump() + '\n');
    }
    return frames;
}

void Endpoint::send(const Message& m) {
    auto frames = encode_frames(m);
    std::lock_guard lock(send_mutex_);
    for (const auto& f : frames) write_frame(f);
}

std::optional<Message> Endpoint::receive() {
    for (;;) {
        auto frame = read_frame();
        if (!frame) return std::nullopt;
        if (frame->size() > kMaxFrame) throw ProtocolError(kMaxFrame, "frame larger than 64 MiB");
        Message m = decode(*frame);
        bool more = false;
        try {
            more = has_more(json::parse(*frame));
        } catch (const json::exception&) {
        }
        GnDelta* delta = delta_of(m);
        if (delta && more) {
            pending_.insert(pending_.end(), std::make_move_iterator(delta->begin()), std::make_move_iterator(delta->end()));
            continue;
        }
        if (delta && !pending_.empty()) {
            pending_.insert(pending_.end(), std::make_move_iterator(delta->begin()), std::make_move_iterator(delta->end()));
            *delta = std::move(pending_);
            pending_.clear();
        }
        return m;
    }
}

namespace {

struct Pipe {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> frames;
    bool closed = false;
};

class ChannelEndpoint final : public Endpoint {
public:
    ChannelEndpoint(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~ChannelEndpoint() override { close(); }

    void close() override {
        for (auto* p : {in_.get(), out_.get()}) {
            {
                std::lock_guard lock(p->mutex);
                p->closed = true;
            }
            p->cv.notify_all();
        }
    }

protected:
    void write_frame(const std::string& frame) override {
        {
            std::lock_guard lock(out_->mutex);
            if (out_->closed) throw TransportClosed();
            out_->frames.push_back(frame);
        }
        out_->cv.notify_one();
    }
    std::optional<std::string> read_frame() override {
        std::unique_lock lock(in_->mutex);
        in_->cv.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
        if (in_->frames.empty()) return std::nullopt;
        std::string f = std::move(in_->frames.front());
        in_->frames.pop_front();
        return f;
    }

private:
    std::shared_ptr<Pipe> in_;
    std::shared_ptr<Pipe> out_;
};

class SocketEndpoint final : public Endpoint {
public:
    explicit SocketEndpoint(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~SocketEndpoint() override {
        close();
        ::close(fd_);
    }

    void close() override {
        if (!shut_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
    }

protected:
    void write_frame(const std::string& frame) override {
        std::size_t sent = 0;
        while (sent < frame.size()) {
            const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) throw TransportClosed();
            sent += static_cast<std::size_t>(n);
        }
    }
    std::optional<std::string> read_frame() override {
        for (;;) {
            const auto nl = buffer_.find('\n', scanned_);
            if (nl != std::string::npos) {
                std::string frame = buffer_.substr(0, nl + 1);
                buffer_.erase(0, nl + 1);
                scanned_ = 0;
                return frame;
            }
            scanned_ = buffer_.size();
            if (buffer_.size() > kMaxFrame) throw ProtocolError(kMaxFrame, "frame larger than 64 MiB");
            char chunk[65536];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                if (!buffer_.empty()) throw ProtocolError(buffer_.size(), "connection closed inside a frame");
                return std::nullopt;
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int fd_;
    std::atomic<bool> shut_{false};
    std::string buffer_;
    std::size_t scanned_ = 0;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
        throw std::runtime_error("cannot resolve host '" + host + "'");
    sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
    ::freeaddrinfo(res);
    addr.sin_port = htons(port);
    return addr;
}

[[noreturn]] void sys_fail(const std::string& what) { throw std::runtime_error(what + ": " + std::strerror(errno)); }

}  // namespace

std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> make_channel_pair() {
    auto a = std::make_shared<Pipe>();
    auto b = std::make_shared<Pipe>();
    return {std::make_unique<ChannelEndpoint>(a, b), std::make_unique<ChannelEndpoint>(b, a)};
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) sys_fail("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = resolve(host, port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        ::close(fd_);
        sys_fail("bind");
    }
    if (::listen(fd_, 64) < 0) {
        ::close(fd_);
        sys_fail("listen");
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Endpoint> TcpListener::accept() {
    for (;;) {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) return std::make_unique<SocketEndpoint>(fd);
        if (errno != EINTR) sys_fail("accept");
    }
}

std::unique_ptr<Endpoint> tcp_connect(const std::string& host, std::uint16_t port, int timeout_ms) {
    const sockaddr_in addr = resolve(host, port);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) sys_fail("socket");
        if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0)
            return std::make_unique<SocketEndpoint>(fd);
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline) sys_fail("connect");
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

}  // namespace spots::proto
