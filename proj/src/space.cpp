#include "farloc/space.hpp"

#include "farloc/error.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>

namespace farloc {

namespace {

std::string hex(std::uint64_t raw)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(raw));
    return buf;
}

} // namespace

Space::Space(SpaceConfig cfg) : cfg_(cfg)
{
    if (cfg_.page_size_bytes < 256 || !is_power_of_two(cfg_.page_size_bytes))
        throw ConfigError("page size must be a power of two >= 256, got " + std::to_string(cfg_.page_size_bytes));
    if (cfg_.page_size_bytes > (std::size_t{1} << 30))
        throw ConfigError("page size too large");

    // Address 0 is null, so the purely-local region starts one page in.
    local_base_ = cfg_.page_size_bytes;
    swap_base_ = align_up(local_base_ + cfg_.purely_local_capacity_bytes, cfg_.page_size_bytes);

    local_free_bytes_ = cfg_.purely_local_capacity_bytes;
    if (cfg_.purely_local_capacity_bytes > 0) {
        local_data_ = std::make_unique<std::byte[]>(cfg_.purely_local_capacity_bytes);
        local_index_.assign(cfg_.purely_local_capacity_bytes / granule + 1);
        local_free_add(0, cfg_.purely_local_capacity_bytes);
    }
}

std::size_t Space::block_bytes(std::size_t size_bytes, std::size_t align) const
{
    if (size_bytes == 0)
        throw UsageError("block size must be positive");
    if (!is_power_of_two(align))
        throw UsageError("alignment must be a power of two, got " + std::to_string(align));
    return align_up(size_bytes, granule);
}

Handle Space::carve_purely_local(std::size_t size_bytes, std::size_t align)
{
    const std::size_t bytes = block_bytes(size_bytes, align);
    align = std::max(align, granule);

    // First-fit in address order; the index skips extents that are too short.
    for (std::size_t slot = local_index_.find_first(bytes); slot != detail::FirstFitIndex::npos;
         slot = local_index_.find_first(bytes, slot + 1)) {
        const auto it = local_free_.find(std::uint64_t{slot} * granule);
        const auto [off, len] = *it;
        const std::uint64_t start = align_up(local_base_ + off, align) - local_base_;
        if (start + bytes > off + len)
            continue;
        local_free_remove(it);
        if (start > off)
            local_free_add(off, start - off);
        if (start + bytes < off + len)
            local_free_add(start + bytes, off + len - start - bytes);
        local_free_bytes_ -= bytes;

        const Handle h{local_base_ + start};
        blocks_.emplace(h.raw, static_cast<std::uint32_t>(bytes));
        std::memset(local_data_.get() + start, 0, bytes);
        return h;
    }
    throw CapacityExhausted("purely-local region has no free block of " + std::to_string(bytes) + " bytes");
}

void Space::local_free_add(std::uint64_t off, std::uint64_t len)
{
    local_free_.emplace(off, len);
    local_index_.set(off / granule, len);
}

std::map<std::uint64_t, std::uint64_t>::iterator Space::local_free_remove(
    std::map<std::uint64_t, std::uint64_t>::iterator it)
{
    local_index_.set(it->first / granule, 0);
    return local_free_.erase(it);
}

PageId Space::create_page()
{
    Page page;
    page.data = std::make_unique<std::byte[]>(cfg_.page_size_bytes);
    page.free.push_back({0, static_cast<std::uint32_t>(cfg_.page_size_bytes)});
    pages_.push_back(std::move(page));
    return PageId{pages_.size() - 1};
}

Handle Space::carve_in_page(PageId id, std::size_t size_bytes, std::size_t align)
{
    const std::size_t bytes = block_bytes(size_bytes, align);
    if (bytes > cfg_.page_size_bytes)
        throw UsageError("block of " + std::to_string(bytes) + " bytes exceeds the page size");
    if (id.index >= pages_.size())
        throw UsageError("unknown page " + std::to_string(id.index));
    align = std::max(align, granule);

    Page& page = pages_[id.index];
    const std::uint64_t base = swap_base_ + id.index * cfg_.page_size_bytes;
    for (auto it = page.free.begin(); it != page.free.end(); ++it) {
        const Extent e = *it;
        const std::uint64_t start = align_up(base + e.offset, align) - base;
        const std::uint64_t end = std::uint64_t{e.offset} + e.length;
        if (start + bytes > end)
            continue;
        it = page.free.erase(it);
        if (start + bytes < end)
            it = page.free.insert(it, {static_cast<std::uint32_t>(start + bytes),
                                       static_cast<std::uint32_t>(end - start - bytes)});
        if (start > e.offset)
            page.free.insert(it, {e.offset, static_cast<std::uint32_t>(start - e.offset)});
        page.used += static_cast<std::uint32_t>(bytes);

        const Handle h{base + start};
        blocks_.emplace(h.raw, static_cast<std::uint32_t>(bytes));
        std::memset(page.data.get() + start, 0, bytes);
        return h;
    }
    throw CapacityExhausted("page " + std::to_string(id.index) + " has no free block of " + std::to_string(bytes) +
                            " bytes");
}

void Space::release(Handle h)
{
    const auto it = blocks_.find(h.raw);
    if (it == blocks_.end())
        throw UsageError("release of unallocated handle " + hex(h.raw));
    const std::uint64_t bytes = it->second;
    blocks_.erase(it);

    if (h.raw < swap_base_) {
        std::uint64_t off = h.raw - local_base_;
        std::uint64_t len = bytes;
        auto next = local_free_.lower_bound(off);
        if (next != local_free_.end() && next->first == off + len) {
            len += next->second;
            next = local_free_remove(next);
        }
        if (next != local_free_.begin()) {
            auto prev = std::prev(next);
            if (prev->first + prev->second == off) {
                off = prev->first;
                len += prev->second;
                local_free_remove(prev);
            }
        }
        local_free_add(off, len);
        local_free_bytes_ += bytes;
        return;
    }

    const std::uint64_t index = (h.raw - swap_base_) / cfg_.page_size_bytes;
    Page& page = pages_[index];
    auto off = static_cast<std::uint32_t>((h.raw - swap_base_) % cfg_.page_size_bytes);
    auto len = static_cast<std::uint32_t>(bytes);
    auto next = std::lower_bound(page.free.begin(), page.free.end(), off,
                                 [](const Extent& e, std::uint32_t o) { return e.offset < o; });
    if (next != page.free.end() && next->offset == off + len) {
        len += next->length;
        next = page.free.erase(next);
    }
    if (next != page.free.begin()) {
        auto prev = std::prev(next);
        if (prev->offset + prev->length == off) {
            prev->length += len;
            page.used -= static_cast<std::uint32_t>(bytes);
            return;
        }
    }
    page.free.insert(next, {off, len});
    page.used -= static_cast<std::uint32_t>(bytes);
}

std::uint64_t Space::block_at(Handle h) const
{
    const auto it = blocks_.find(h.raw);
    if (it == blocks_.end())
        throw UsageError("access through unallocated handle " + hex(h.raw));
    return it->second;
}

void Space::touch(Handle h, std::size_t offset, std::size_t len, bool is_write)
{
    const std::uint64_t size = block_at(h);
    if (len == 0 || offset + len > size)
        throw UsageError("touch range exceeds the block at " + hex(h.raw));
    if (h.raw < swap_base_)
        return;
    const std::uint64_t first = (h.raw + offset - swap_base_) / cfg_.page_size_bytes;
    const std::uint64_t last = (h.raw + offset + len - 1 - swap_base_) / cfg_.page_size_bytes;
    for (std::uint64_t page = first; page <= last; ++page)
        fault_in(page, is_write);
}

std::span<std::byte> Space::access(Handle h, Access mode)
{
    const std::uint64_t size = block_at(h);
    if (h.raw >= swap_base_)
        fault_in((h.raw - swap_base_) / cfg_.page_size_bytes, mode == Access::write);
    return {address(h), size};
}

std::span<const std::byte> Space::peek(Handle h) const
{
    const std::uint64_t size = block_at(h);
    return {address(h), size};
}

std::byte* Space::address(Handle h)
{
    return const_cast<std::byte*>(std::as_const(*this).address(h));
}

const std::byte* Space::address(Handle h) const
{
    if (h.raw < swap_base_)
        return local_data_.get() + (h.raw - local_base_);
    const std::uint64_t rel = h.raw - swap_base_;
    return pages_[rel / cfg_.page_size_bytes].data.get() + rel % cfg_.page_size_bytes;
}

void Space::fault_in(std::uint64_t index, bool is_write)
{
    Page& page = pages_[index];
    if (page.resident) {
        if (index != lru_head_) {
            lru_unlink(index);
            lru_push_front(index);
        }
        page.dirty = page.dirty || is_write;
        return;
    }

    ++stats_.faults;
    ++stats_.swap_ins;
    if (cfg_.cache_capacity_pages == 0) {
        // Nothing can stay resident: the page is used and dropped at once.
        if (is_write)
            ++stats_.write_backs;
        return;
    }
    if (resident_count_ == cfg_.cache_capacity_pages)
        evict(lru_tail_);
    lru_push_front(index);
    page.resident = true;
    page.dirty = is_write;
    ++resident_count_;
}

void Space::evict(std::uint64_t index)
{
    Page& page = pages_[index];
    lru_unlink(index);
    if (page.dirty)
        ++stats_.write_backs;
    page.resident = false;
    page.dirty = false;
    --resident_count_;
}

void Space::lru_unlink(std::uint64_t index)
{
    Page& page = pages_[index];
    if (page.lru_prev != no_page)
        pages_[page.lru_prev].lru_next = page.lru_next;
    else
        lru_head_ = page.lru_next;
    if (page.lru_next != no_page)
        pages_[page.lru_next].lru_prev = page.lru_prev;
    else
        lru_tail_ = page.lru_prev;
    page.lru_prev = page.lru_next = no_page;
}

void Space::lru_push_front(std::uint64_t index)
{
    Page& page = pages_[index];
    page.lru_prev = no_page;
    page.lru_next = lru_head_;
    if (lru_head_ != no_page)
        pages_[lru_head_].lru_prev = index;
    lru_head_ = index;
    if (lru_tail_ == no_page)
        lru_tail_ = index;
}

void Space::evict_all()
{
    while (lru_tail_ != no_page)
        evict(lru_tail_);
}

std::optional<PageId> Space::page_of(Handle h) const
{
    block_at(h);
    if (h.raw < swap_base_)
        return std::nullopt;
    return PageId{(h.raw - swap_base_) / cfg_.page_size_bytes};
}

bool Space::is_purely_local(Handle h) const
{
    block_at(h);
    return h.raw < swap_base_;
}

std::size_t Space::block_size(Handle h) const
{
    return block_at(h);
}

const Space::Page& Space::page_ref(PageId id) const
{
    if (id.index >= pages_.size())
        throw UsageError("unknown page " + std::to_string(id.index));
    return pages_[id.index];
}

std::size_t Space::page_used_bytes(PageId page) const
{
    return page_ref(page).used;
}

std::size_t Space::page_largest_free(PageId id) const
{
    std::size_t best = 0;
    for (const Extent& e : page_ref(id).free)
        best = std::max<std::size_t>(best, e.length);
    return best;
}

bool Space::is_resident(PageId page) const
{
    return page_ref(page).resident;
}

bool Space::is_dirty(PageId page) const
{
    return page_ref(page).dirty;
}

std::vector<PageId> Space::lru_order() const
{
    std::vector<PageId> out;
    out.reserve(resident_count_);
    for (std::uint64_t i = lru_head_; i != no_page; i = pages_[i].lru_next)
        out.push_back(PageId{i});
    return out;
}

} // namespace farloc
