#pragma once

#include "farloc/first_fit_index.hpp"
#include "farloc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace farloc {

struct SpaceConfig {
    std::size_t page_size_bytes = 4096;
    std::size_t purely_local_capacity_bytes = 0;
    std::size_t cache_capacity_pages = 0;
};

struct SwapStats {
    std::uint64_t swap_ins = 0;    ///< pages fetched into the resident cache
    std::uint64_t write_backs = 0; ///< dirty pages written out on eviction
    std::uint64_t faults = 0;      ///< touches of non-resident pages

    friend bool operator==(const SwapStats&, const SwapStats&) = default;
};

enum class Access { read, write };

/// Simulated far-memory address space.
///
/// The address space has a purely-local region of fixed capacity, which is
/// never swapped, followed by an unbounded swappable region made of
/// fixed-size pages. Swappable pages move in and out of a bounded resident
/// cache under strict LRU; every movement is counted in SwapStats. Block
/// payloads live in a flat backing store so containers can keep real data in
/// the space and observe the exact page traffic their accesses cause.
///
/// Blocks are carved on a 16-byte granule with first-fit free lists, never
/// straddle a page boundary, and carry no in-band metadata. Raw address 0 is
/// reserved for the null handle.
class Space {
public:
    static constexpr std::size_t granule = 16;

    explicit Space(SpaceConfig cfg);

    Space(const Space&) = delete;
    Space& operator=(const Space&) = delete;

    const SpaceConfig& config() const noexcept { return cfg_; }
    std::size_t page_size() const noexcept { return cfg_.page_size_bytes; }

    Handle carve_purely_local(std::size_t size_bytes, std::size_t align = granule);
    PageId create_page();
    Handle carve_in_page(PageId page, std::size_t size_bytes, std::size_t align = granule);

    /// Returns a block to the free list of its region or page.
    void release(Handle h);

    /// Applies the residency effect of accessing [h, h + len).
    void touch(Handle h, std::size_t len, bool is_write) { touch(h, 0, len, is_write); }
    void touch(Handle h, std::size_t offset, std::size_t len, bool is_write);

    /// Touches the whole block and returns its bytes. The span stays valid
    /// until the block is released.
    std::span<std::byte> access(Handle h, Access mode);

    /// Block bytes without any residency effect (inspection only).
    std::span<const std::byte> peek(Handle h) const;

    /// Swaps out every resident page, writing back the dirty ones.
    void evict_all();

    std::optional<PageId> page_of(Handle h) const;
    bool is_purely_local(Handle h) const;
    bool is_live(Handle h) const noexcept { return blocks_.contains(h.raw); }
    std::size_t block_size(Handle h) const;
    std::size_t live_blocks() const noexcept { return blocks_.size(); }

    SwapStats stats() const noexcept { return stats_; }
    void reset_stats() noexcept { stats_ = {}; }

    std::size_t page_count() const noexcept { return pages_.size(); }
    std::size_t page_used_bytes(PageId page) const;
    std::size_t page_largest_free(PageId page) const;
    std::size_t purely_local_free_bytes() const noexcept { return local_free_bytes_; }

    std::size_t resident_pages() const noexcept { return resident_count_; }
    bool is_resident(PageId page) const;
    bool is_dirty(PageId page) const;
    /// Resident pages from most to least recently used.
    std::vector<PageId> lru_order() const;

private:
    static constexpr std::uint64_t no_page = ~std::uint64_t{0};

    struct Extent {
        std::uint32_t offset;
        std::uint32_t length;
    };

    struct Page {
        std::unique_ptr<std::byte[]> data;
        std::vector<Extent> free; // sorted by offset, coalesced
        std::uint32_t used = 0;
        std::uint64_t lru_prev = no_page;
        std::uint64_t lru_next = no_page;
        bool resident = false;
        bool dirty = false;
    };

    std::size_t block_bytes(std::size_t size_bytes, std::size_t align) const;
    const Page& page_ref(PageId page) const;
    std::uint64_t block_at(Handle h) const; // block size or throws
    std::byte* address(Handle h);
    const std::byte* address(Handle h) const;
    void local_free_add(std::uint64_t off, std::uint64_t len);
    std::map<std::uint64_t, std::uint64_t>::iterator local_free_remove(std::map<std::uint64_t, std::uint64_t>::iterator it);
    void fault_in(std::uint64_t page, bool is_write);
    void lru_unlink(std::uint64_t page);
    void lru_push_front(std::uint64_t page);
    void evict(std::uint64_t page);

    SpaceConfig cfg_;
    std::uint64_t local_base_;
    std::uint64_t swap_base_;

    std::unique_ptr<std::byte[]> local_data_;
    std::map<std::uint64_t, std::uint64_t> local_free_; // offset -> length
    detail::FirstFitIndex local_index_;                 // granule -> length of the extent starting there
    std::size_t local_free_bytes_;

    std::vector<Page> pages_;
    std::unordered_map<std::uint64_t, std::uint32_t> blocks_; // raw address -> block bytes

    std::uint64_t lru_head_ = no_page; // most recently used
    std::uint64_t lru_tail_ = no_page;
    std::size_t resident_count_ = 0;
    SwapStats stats_;
};

} // namespace farloc
