#include "spots/pdfpn.hpp"

#include <algorithm>
#include <functional>

namespace spots {

ThreadRegistry::ThreadRegistry(unsigned threads) : threads_(std::max(threads, 1u)) {}

ThreadRegistry::Shard& ThreadRegistry::shard_of(const std::string& key) const {
    return shards_[std::hash<std::string>{}(key) % kShards];
}

void ThreadRegistry::push(unsigned thread, const std::string& key) {
    {
        Shard& s = shard_of(key);
        std::lock_guard lock(s.mutex);
        ++s.counts[key];
    }
    std::lock_guard lock(threads_[thread].mutex);
    threads_[thread].path.push_back(key);
}

void ThreadRegistry::pop(unsigned thread) {
    std::string key;
    {
        std::lock_guard lock(threads_[thread].mutex);
        key = std::move(threads_[thread].path.back());
        threads_[thread].path.pop_back();
    }
    Shard& s = shard_of(key);
    std::lock_guard lock(s.mutex);
    auto it = s.counts.find(key);
    if (it != s.counts.end() && --it->second == 0) s.counts.erase(it);
}

unsigned ThreadRegistry::count(const std::string& key) const {
    Shard& s = shard_of(key);
    std::lock_guard lock(s.mutex);
    auto it = s.counts.find(key);
    return it == s.counts.end() ? 0 : it->second;
}

std::size_t ThreadRegistry::notify_solved(const std::string& key, unsigned from) {
    if (count(key) == 0) return 0;
    std::size_t signalled = 0;
    for (unsigned t = 0; t < threads_.size(); ++t) {
        if (t == from) continue;
        PerThread& pt = threads_[t];
        std::lock_guard lock(pt.mutex);
        auto it = std::find(pt.path.begin(), pt.path.end(), key);
        if (it == pt.path.end()) continue;
        const auto depth = static_cast<std::size_t>(it - pt.path.begin());
        std::size_t cur = pt.abort.load();
        while (depth < cur && !pt.abort.compare_exchange_weak(cur, depth)) {
        }
        ++signalled;
    }
    return signalled;
}

std::size_t ThreadRegistry::path_length(unsigned thread) const {
    std::lock_guard lock(threads_[thread].mutex);
    return threads_[thread].path.size();
}

bool ThreadRegistry::balanced() const {
    for (const auto& s : shards_) {
        std::lock_guard lock(s.mutex);
        if (!s.counts.empty()) return false;
    }
    return true;
}

PnValue effective_dn(const std::string& key, PnValue dn, const ThreadRegistry& registry) {
    return dn + PnValue(registry.count(key));
}

PnValue adjusted_dt(PnValue pt_v, PnValue dn_w2, unsigned th_w) {
    return std::min(pt_v, dn_w2 + PnValue(1) - PnValue(th_w));
}

}  // namespace spots
