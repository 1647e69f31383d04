#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "autolinc/loss_expr.hpp"

namespace autolinc {

struct ArchiveRecord {
    std::string expr;
    std::string canonical;
    double reward = 0;
    std::string status;  // "finished", "rejected(<reason>)", "cached-from"
    int episode = -1;
    int trial = -1;
    long wall_ms = 0;
};

// The record M of evaluated loss functions. One record per canonical
// text; lookups also hit on gradient fingerprint. Insertions and
// lookups are mutex-guarded so parallel rollouts stay linearizable.
class Archive {
public:
    Archive() = default;
    Archive(Archive&& o) noexcept
        : records_(std::move(o.records_)),
          by_canonical_(std::move(o.by_canonical_)),
          by_fingerprint_(std::move(o.by_fingerprint_)) {}
    Archive& operator=(Archive&& o) noexcept {
        records_ = std::move(o.records_);
        by_canonical_ = std::move(o.by_canonical_);
        by_fingerprint_ = std::move(o.by_fingerprint_);
        return *this;
    }

    // Returns the stored reward when the canonical text or fingerprint
    // is already known.
    std::optional<double> lookup(const std::string& canon, const Fingerprint& fp) const;
    bool contains(const std::string& canon) const;

    void insert(ArchiveRecord rec, const std::optional<Fingerprint>& fp);

    std::vector<ArchiveRecord> records() const;
    size_t size() const;
    size_t finished_count() const;
    double max_reward() const;

    // Top-k finished records by reward, ties broken by earlier episode.
    std::vector<ArchiveRecord> top(size_t k) const;
    // Reward of the k-th best finished record, or nullopt when fewer exist.
    std::optional<double> kth_best(size_t k) const;

    void save_jsonl(const std::string& path) const;
    static Archive load_jsonl(const std::string& path);

private:
    mutable std::mutex mu_;
    std::vector<ArchiveRecord> records_;
    std::unordered_map<std::string, size_t> by_canonical_;
    std::unordered_map<uint64_t, size_t> by_fingerprint_;
};

}  // namespace autolinc
