#pragma once

#include "farloc/first_fit_index.hpp"
#include "farloc/space.hpp"
#include "farloc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace farloc {

enum class Kind : std::uint8_t {
    purely_local,    ///< singleton owning the whole purely-local region
    swappable_plain, ///< singleton with unbounded capacity over many pages
    new_per_page,    ///< a fresh sub-allocator owning exactly one new page
};

struct SubAllocatorRef {
    std::uint32_t id = 0;
    Kind kind = Kind::purely_local;

    friend bool operator==(SubAllocatorRef, SubAllocatorRef) = default;
};

struct ObjectLayout {
    std::size_t size_bytes = 0;
    std::size_t align = Space::granule;
};

/// Allocator made of sub-allocators that own disjoint subspaces of a Space.
///
/// Clients pick a sub-allocator by kind or by an existing handle, may query
/// its occupancy, and allocate from it. Handles from every sub-allocator are
/// interchangeable and any of them can be freed through deallocate().
///
/// Page ownership is strict: every page this allocator creates belongs to
/// either the swappable plain sub-allocator or to exactly one per-page
/// sub-allocator, for the lifetime of the allocator.
class CollectiveAllocator {
public:
    static constexpr SubAllocatorRef purely_local{0, Kind::purely_local};
    static constexpr SubAllocatorRef swappable_plain{1, Kind::swappable_plain};

    explicit CollectiveAllocator(Space& space);

    CollectiveAllocator(const CollectiveAllocator&) = delete;
    CollectiveAllocator& operator=(const CollectiveAllocator&) = delete;

    Space& space() noexcept { return *space_; }
    const Space& space() const noexcept { return *space_; }

    SubAllocatorRef get_suballocator(Kind kind);
    SubAllocatorRef get_suballocator(Handle h) const;
    bool if_suballocator_contains(SubAllocatorRef suballoc, Handle h) const;
    /// Strictly-less occupancy test; unbounded sub-allocators report 0.
    bool is_occupancy_under(SubAllocatorRef suballoc, double ratio) const;

    /// count * layout.size_bytes contiguous bytes from the given subspace.
    /// Throws CapacityExhausted for a full purely-local region or page.
    Handle allocate(SubAllocatorRef suballoc, std::size_t count, ObjectLayout layout);
    void deallocate(Handle h, std::size_t count, ObjectLayout layout);

    double occupancy(SubAllocatorRef suballoc) const;
    std::size_t allocated_bytes(SubAllocatorRef suballoc) const;
    /// nullopt for the unbounded swappable plain sub-allocator.
    std::optional<std::size_t> capacity_bytes(SubAllocatorRef suballoc) const;
    /// The page of a per-page sub-allocator.
    std::optional<PageId> page_of(SubAllocatorRef suballoc) const;
    SubAllocatorRef owner_of(PageId page) const;
    bool owns_page(PageId page) const;

    std::size_t suballocator_count() const noexcept { return subs_.size(); }
    const std::vector<PageId>& plain_pages() const noexcept { return plain_pages_; }

private:
    static constexpr std::uint32_t unowned = ~std::uint32_t{0};

    struct Sub {
        Kind kind;
        PageId page; // per-page only
        std::size_t allocated = 0;
    };

    const Sub& sub(SubAllocatorRef ref) const;
    Handle allocate_plain(std::size_t bytes, std::size_t align);
    void adopt_page(PageId page, std::uint32_t owner);
    void refresh_plain_slot(PageId page);

    Space* space_;
    std::vector<Sub> subs_;
    std::vector<std::uint32_t> page_owner_; // PageId.index -> sub id
    std::vector<std::uint32_t> plain_slot_; // PageId.index -> slot in plain_free_
    std::vector<PageId> plain_pages_;
    detail::FirstFitIndex plain_free_;
};

} // namespace farloc
