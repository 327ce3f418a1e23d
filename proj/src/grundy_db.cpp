#include "spots/grundy_db.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>

namespace spots {

bool GrundyDatabase::insert(const PositionKey& key, NimValue value) {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = values_.try_emplace(key, value);
    if (!inserted) {
        if (it->second != value) throw GrundyConflict(key, it->second, value);
        return false;
    }
    log_.push_back(&it->first);
    return true;
}

std::optional<NimValue> GrundyDatabase::find(std::string_view key) const {
    std::shared_lock lock(mutex_);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    return std::nullopt;
}

std::size_t GrundyDatabase::size() const {
    std::shared_lock lock(mutex_);
    return log_.size();
}

std::vector<GrundyEntry> GrundyDatabase::entries_since(std::size_t cursor, std::size_t limit) const {
    std::shared_lock lock(mutex_);
    std::vector<GrundyEntry> out;
    for (std::size_t i = cursor; i < log_.size() && out.size() < limit; ++i)
        out.push_back({*log_[i], values_.find(*log_[i])->second});
    return out;
}

std::vector<GrundyEntry> GrundyDatabase::sorted_entries() const {
    auto all = entries_since(0);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return all;
}

void GrundyDatabase::write(std::ostream& out) const {
    out << kHeader << '\n';
    for (const auto& e : sorted_entries()) out << e.key << '\t' << e.value << '\n';
}

void GrundyDatabase::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write(out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void GrundyDatabase::read(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw FormatError("missing header", 1);
    ++lineno;
    if (line != kHeader) throw FormatError("expected header " + std::string(kHeader), lineno);
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("expected key<TAB>value", lineno);
        NimValue value = 0;
        const char* first = line.data() + tab + 1;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last || first == last) throw FormatError("bad Grundy number", lineno);
        try {
            insert(line.substr(0, tab), value);
        } catch (const GrundyConflict& e) {
            throw FormatError(e.what(), lineno);
        }
    }
}

void GrundyDatabase::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    read(in);
}

}  // namespace spots
