#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spots/game.hpp"

namespace spots {

/// Two derivations disagree on the Grundy number of one position.
class GrundyConflict : public std::logic_error {
public:
    GrundyConflict(const PositionKey& key, NimValue stored, NimValue offered)
        : std::logic_error("conflicting Grundy numbers for '" + key + "': " + std::to_string(stored) + " vs " +
                           std::to_string(offered)) {}
};

class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct GrundyEntry {
    PositionKey key;
    NimValue value = 0;

    friend bool operator==(const GrundyEntry&, const GrundyEntry&) = default;
};

/// Append-only map from atomic position key to Grundy number. Entries are
/// never evicted or rewritten; the insertion log backs incremental deltas.
/// Safe for concurrent use.
class GrundyDatabase {
public:
    static constexpr std::string_view kHeader = "#spots-gn-v1";

    GrundyDatabase() = default;
    GrundyDatabase(const GrundyDatabase&) = delete;
    GrundyDatabase& operator=(const GrundyDatabase&) = delete;

    /// True if the key was new. Throws GrundyConflict on a different value.
    bool insert(const PositionKey& key, NimValue value);
    std::optional<NimValue> find(std::string_view key) const;

    std::size_t size() const;
    /// Number of log entries; a cursor for entries_since().
    std::size_t version() const { return size(); }
    /// Log entries [cursor, cursor + limit) in insertion order.
    std::vector<GrundyEntry> entries_since(std::size_t cursor, std::size_t limit = SIZE_MAX) const;
    std::vector<GrundyEntry> sorted_entries() const;

    void write(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    /// Merges records from a stream into this database. Throws FormatError.
    void read(std::istream& in);
    void load(const std::filesystem::path& path);

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };

    mutable std::shared_mutex mutex_;
    std::unordered_map<PositionKey, NimValue, Hash, std::equal_to<>> values_;
    std::vector<const PositionKey*> log_;
};

}  // namespace spots
