#include "farloc/hint_allocator.hpp"

#include "farloc/error.hpp"

namespace farloc {

std::size_t HintAllocator::slot_of(PageId page) const
{
    return page.index < slot_.size() ? slot_[page.index] : unowned;
}

bool HintAllocator::owns(Handle h) const
{
    if (!space_->is_live(h))
        return false;
    const auto page = space_->page_of(h);
    return page && slot_of(*page) != unowned;
}

Handle HintAllocator::carve(PageId page, std::size_t bytes, std::size_t align)
{
    const Handle h = space_->carve_in_page(page, bytes, align);
    free_.set(slot_of(page), space_->page_largest_free(page));
    allocated_ += space_->block_size(h);
    return h;
}

Handle HintAllocator::allocate(std::size_t count, ObjectLayout layout, Handle hint)
{
    if (count == 0 || layout.size_bytes == 0)
        throw UsageError("allocation of zero bytes");
    const std::size_t bytes = count * layout.size_bytes;
    if (align_up(bytes, Space::granule) > space_->page_size())
        throw UsageError("allocation larger than a page");

    if (hint) {
        if (!owns(hint))
            throw UsageError("allocation hint does not point into this allocator");
        try {
            return carve(*space_->page_of(hint), bytes, layout.align);
        } catch (const CapacityExhausted&) {
            // hint's page is full: same path as an unhinted request
        }
    }

    for (std::size_t slot = free_.find_first(bytes); slot != detail::FirstFitIndex::npos;
         slot = free_.find_first(bytes, slot + 1)) {
        try {
            return carve(pages_[slot], bytes, layout.align);
        } catch (const CapacityExhausted&) {
        }
    }

    const PageId page = space_->create_page();
    if (page.index >= slot_.size())
        slot_.resize(page.index + 1, unowned);
    slot_[page.index] = free_.push_back(space_->page_size());
    pages_.push_back(page);
    return carve(page, bytes, layout.align);
}

void HintAllocator::deallocate(Handle h, std::size_t count, ObjectLayout layout)
{
    if (!owns(h))
        throw UsageError("deallocate of a handle not allocated by this allocator");
    const std::size_t bytes = space_->block_size(h);
    if (bytes != align_up(count * layout.size_bytes, Space::granule))
        throw UsageError("deallocate size does not match the allocation");
    const PageId page = *space_->page_of(h);
    space_->release(h);
    allocated_ -= bytes;
    free_.set(slot_of(page), space_->page_largest_free(page));
}

} // namespace farloc
