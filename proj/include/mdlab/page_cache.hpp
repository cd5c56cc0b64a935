#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>

namespace mdlab {

struct PageId {
    std::uint32_t file = 0;
    std::uint64_t page = 0;

    bool operator==(const PageId&) const = default;
};

struct PageIdHash {
    std::size_t operator()(const PageId& p) const {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(p.file) << 48) ^ p.page);
    }
};

/// Countable buffer cache. capacity 0 means unbounded (the regime the
/// analytic model assumes); bounded mode evicts LRU.
class PageCache {
public:
    explicit PageCache(std::uint64_t capacity_pages = 0) : capacity_(capacity_pages) {}

    /// Touches a page; returns true if it had to be fetched (miss).
    bool access(PageId id) {
        auto it = index_.find(id);
        if (it != index_.end()) {
            ++hits_;
            lru_.splice(lru_.begin(), lru_, it->second);
            return false;
        }
        ++fetches_;
        lru_.push_front(id);
        index_[id] = lru_.begin();
        if (capacity_ > 0 && index_.size() > capacity_) {
            index_.erase(lru_.back());
            lru_.pop_back();
        }
        return true;
    }

    bool resident(PageId id) const { return index_.count(id) > 0; }

    std::uint64_t resident_count() const { return index_.size(); }
    std::uint64_t fetches() const { return fetches_; }
    std::uint64_t hits() const { return hits_; }
    std::uint64_t capacity() const { return capacity_; }

    void clear() {
        lru_.clear();
        index_.clear();
        fetches_ = hits_ = 0;
    }

private:
    std::uint64_t capacity_;
    std::list<PageId> lru_;
    std::unordered_map<PageId, std::list<PageId>::iterator, PageIdHash> index_;
    std::uint64_t fetches_ = 0;
    std::uint64_t hits_ = 0;
};

inline constexpr std::uint64_t kPageSize = 4096;

}  // namespace mdlab
