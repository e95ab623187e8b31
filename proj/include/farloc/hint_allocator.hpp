#pragma once

#include "farloc/collective.hpp"
#include "farloc/first_fit_index.hpp"
#include "farloc/space.hpp"

#include <cstddef>
#include <vector>

namespace farloc {

// Locality-aware allocator behind the standard single-allocator interface:
// a hinted allocation goes to the hint's page when it has room; otherwise
// first fit over the pages in use, then a fresh page. Only the swappable
// region is used. Kept independent of CollectiveAllocator on purpose: it is
// the baseline the collective allocator is compared against.
class HintAllocator {
public:
    explicit HintAllocator(Space& space) : space_(&space) {}

    HintAllocator(const HintAllocator&) = delete;
    HintAllocator& operator=(const HintAllocator&) = delete;

    Space& space() noexcept { return *space_; }
    const Space& space() const noexcept { return *space_; }

    Handle allocate(std::size_t count, ObjectLayout layout, Handle hint = null_handle);
    void deallocate(Handle h, std::size_t count, ObjectLayout layout);

    bool owns(Handle h) const;
    const std::vector<PageId>& pages() const noexcept { return pages_; }
    std::size_t allocated_bytes() const noexcept { return allocated_; }

private:
    static constexpr std::size_t unowned = static_cast<std::size_t>(-1);

    std::size_t slot_of(PageId page) const;
    Handle carve(PageId page, std::size_t bytes, std::size_t align);

    Space* space_;
    std::vector<PageId> pages_;
    std::vector<std::size_t> slot_; // PageId.index -> slot
    detail::FirstFitIndex free_;
    std::size_t allocated_ = 0;
};

} // namespace farloc
