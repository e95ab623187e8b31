#include "farloc/collective.hpp"

#include "farloc/error.hpp"

#include <cmath>
#include <string>

namespace farloc {

CollectiveAllocator::CollectiveAllocator(Space& space) : space_(&space)
{
    subs_.push_back({Kind::purely_local, {}, 0});
    subs_.push_back({Kind::swappable_plain, {}, 0});
}

const CollectiveAllocator::Sub& CollectiveAllocator::sub(SubAllocatorRef ref) const
{
    if (ref.id >= subs_.size() || subs_[ref.id].kind != ref.kind)
        throw UsageError("unknown sub-allocator " + std::to_string(ref.id));
    return subs_[ref.id];
}

void CollectiveAllocator::adopt_page(PageId page, std::uint32_t owner)
{
    if (page.index >= page_owner_.size()) {
        page_owner_.resize(page.index + 1, unowned);
        plain_slot_.resize(page.index + 1, unowned);
    }
    page_owner_[page.index] = owner;
}

bool CollectiveAllocator::owns_page(PageId page) const
{
    return page.index < page_owner_.size() && page_owner_[page.index] != unowned;
}

SubAllocatorRef CollectiveAllocator::owner_of(PageId page) const
{
    if (!owns_page(page))
        throw UsageError("page " + std::to_string(page.index) + " is not owned by this allocator");
    const std::uint32_t id = page_owner_[page.index];
    return {id, subs_[id].kind};
}

SubAllocatorRef CollectiveAllocator::get_suballocator(Kind kind)
{
    switch (kind) {
    case Kind::purely_local:
        return purely_local;
    case Kind::swappable_plain:
        return swappable_plain;
    case Kind::new_per_page: {
        const auto id = static_cast<std::uint32_t>(subs_.size());
        const PageId page = space_->create_page();
        subs_.push_back({Kind::new_per_page, page, 0});
        adopt_page(page, id);
        return {id, Kind::new_per_page};
    }
    }
    throw UsageError("unknown sub-allocator kind");
}

SubAllocatorRef CollectiveAllocator::get_suballocator(Handle h) const
{
    const std::optional<PageId> page = space_->page_of(h);
    if (!page)
        return purely_local;
    return owner_of(*page);
}

bool CollectiveAllocator::if_suballocator_contains(SubAllocatorRef suballoc, Handle h) const
{
    return get_suballocator(h) == suballoc;
}

double CollectiveAllocator::occupancy(SubAllocatorRef ref) const
{
    const Sub& s = sub(ref);
    switch (s.kind) {
    case Kind::swappable_plain:
        return 0.0;
    case Kind::purely_local: {
        const std::size_t cap = space_->config().purely_local_capacity_bytes;
        return cap == 0 ? 1.0 : static_cast<double>(s.allocated) / static_cast<double>(cap);
    }
    case Kind::new_per_page:
        return static_cast<double>(s.allocated) / static_cast<double>(space_->page_size());
    }
    return 0.0;
}

bool CollectiveAllocator::is_occupancy_under(SubAllocatorRef suballoc, double ratio) const
{
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw UsageError("occupancy ratio must lie in [0, 1]");
    return occupancy(suballoc) < ratio;
}

std::size_t CollectiveAllocator::allocated_bytes(SubAllocatorRef suballoc) const
{
    return sub(suballoc).allocated;
}

std::optional<std::size_t> CollectiveAllocator::capacity_bytes(SubAllocatorRef ref) const
{
    switch (sub(ref).kind) {
    case Kind::purely_local:
        return space_->config().purely_local_capacity_bytes;
    case Kind::new_per_page:
        return space_->page_size();
    case Kind::swappable_plain:
        break;
    }
    return std::nullopt;
}

std::optional<PageId> CollectiveAllocator::page_of(SubAllocatorRef ref) const
{
    const Sub& s = sub(ref);
    if (s.kind != Kind::new_per_page)
        return std::nullopt;
    return s.page;
}

void CollectiveAllocator::refresh_plain_slot(PageId page)
{
    plain_free_.set(plain_slot_[page.index], space_->page_largest_free(page));
}

Handle CollectiveAllocator::allocate_plain(std::size_t bytes, std::size_t align)
{
    // First fit across plain pages in creation order.
    for (std::size_t slot = plain_free_.find_first(bytes); slot != detail::FirstFitIndex::npos;
         slot = plain_free_.find_first(bytes, slot + 1)) {
        const PageId page = plain_pages_[slot];
        try {
            const Handle h = space_->carve_in_page(page, bytes, align);
            refresh_plain_slot(page);
            return h;
        } catch (const CapacityExhausted&) {
            // largest extent was big enough but not once aligned
        }
    }
    const PageId page = space_->create_page();
    adopt_page(page, swappable_plain.id);
    plain_slot_[page.index] = static_cast<std::uint32_t>(plain_free_.push_back(space_->page_size()));
    plain_pages_.push_back(page);
    const Handle h = space_->carve_in_page(page, bytes, align);
    refresh_plain_slot(page);
    return h;
}

Handle CollectiveAllocator::allocate(SubAllocatorRef suballoc, std::size_t count, ObjectLayout layout)
{
    if (count == 0 || layout.size_bytes == 0)
        throw UsageError("allocation of zero bytes");
    const std::size_t bytes = count * layout.size_bytes;
    sub(suballoc);

    Handle h;
    switch (suballoc.kind) {
    case Kind::purely_local:
        h = space_->carve_purely_local(bytes, layout.align);
        break;
    case Kind::swappable_plain:
        if (bytes > space_->page_size())
            throw UsageError("swappable allocation larger than a page");
        h = allocate_plain(bytes, layout.align);
        break;
    case Kind::new_per_page:
        h = space_->carve_in_page(subs_[suballoc.id].page, bytes, layout.align);
        break;
    }
    subs_[suballoc.id].allocated += space_->block_size(h);
    return h;
}

void CollectiveAllocator::deallocate(Handle h, std::size_t count, ObjectLayout layout)
{
    if (!space_->is_live(h))
        throw UsageError("deallocate of a handle that is not allocated");
    const SubAllocatorRef owner = get_suballocator(h);
    const std::size_t bytes = space_->block_size(h);
    if (bytes != align_up(count * layout.size_bytes, Space::granule))
        throw UsageError("deallocate size does not match the allocation");

    const std::optional<PageId> page = space_->page_of(h);
    space_->release(h);
    subs_[owner.id].allocated -= bytes;
    if (owner == swappable_plain)
        refresh_plain_slot(*page);
}

} // namespace farloc
