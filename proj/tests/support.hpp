// Reference models shared by the unit tests and the acceptance binary.
#pragma once

#include "farloc/collective.hpp"
#include "farloc/error.hpp"
#include "farloc/space.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace farloc::testing {

inline std::uint64_t splitmix(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::vector<std::byte> make_value(std::uint64_t key, std::uint64_t salt, std::size_t size)
{
    std::uint64_t state = key * 31 + salt;
    std::vector<std::byte> v(size);
    for (std::size_t i = 0; i < size; i += 8) {
        const std::uint64_t w = splitmix(state);
        std::memcpy(v.data() + i, &w, std::min<std::size_t>(8, size - i));
    }
    return v;
}

/// Brute-force LRU page cache: a vector of resident pages, MRU first.
struct LruOracle {
    std::size_t capacity = 0;
    std::vector<std::uint64_t> resident;
    std::set<std::uint64_t> dirty;
    SwapStats stats;

    void touch(std::uint64_t page, bool write)
    {
        const auto it = std::find(resident.begin(), resident.end(), page);
        if (it != resident.end()) {
            resident.erase(it);
            resident.insert(resident.begin(), page);
        } else {
            ++stats.faults;
            ++stats.swap_ins;
            if (capacity == 0) {
                // Fetched and dropped again straight away.
                if (write)
                    ++stats.write_backs;
                return;
            }
            if (resident.size() == capacity) {
                const std::uint64_t victim = resident.back();
                resident.pop_back();
                if (dirty.erase(victim))
                    ++stats.write_backs;
            }
            resident.insert(resident.begin(), page);
        }
        if (write)
            dirty.insert(page);
    }

    void evict_all()
    {
        for (const std::uint64_t p : resident)
            if (dirty.erase(p))
                ++stats.write_backs;
        resident.clear();
    }
};

/// Replays random touch scripts against a Space and the brute-force LRU.
/// Returns a description of the first disagreement.
inline std::optional<std::string> lru_equivalence(std::uint64_t seed, std::size_t scripts, std::size_t max_pages,
                                                  std::size_t max_cache, std::size_t steps)
{
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < scripts; ++s) {
        const std::size_t pages = 1 + rng() % max_pages;
        const std::size_t cache = rng() % (max_cache + 1);
        Space space({256, 0, cache});
        std::vector<Handle> blocks;
        for (std::size_t p = 0; p < pages; ++p)
            blocks.push_back(space.carve_in_page(space.create_page(), 64));
        LruOracle oracle{cache, {}, {}, {}};
        for (std::size_t i = 0; i < steps; ++i) {
            const std::size_t roll = rng() % 16;
            if (roll == 0) {
                space.evict_all();
                oracle.evict_all();
            } else {
                const std::size_t p = rng() % pages;
                const bool write = rng() % 3 == 0;
                space.touch(blocks[p], 8, write);
                oracle.touch(p, write);
            }
            std::vector<std::uint64_t> order;
            for (const PageId id : space.lru_order())
                order.push_back(id.index);
            if (space.stats() != oracle.stats || order != oracle.resident)
                return "script " + std::to_string(s) + " step " + std::to_string(i) + ": cache " +
                       std::to_string(cache) + " disagrees with the brute-force LRU";
            for (std::size_t p = 0; p < pages; ++p)
                if (space.is_dirty(PageId{p}) != oracle.dirty.contains(p))
                    return "script " + std::to_string(s) + ": dirty bit of page " + std::to_string(p) + " differs";
        }
    }
    return std::nullopt;
}

/// Random allocate/deallocate script over a CollectiveAllocator with the
/// ownership, round-trip, totality, conservation and purely-local exemption
/// checks applied after every step.
inline std::optional<std::string> allocator_invariants(std::uint64_t seed, std::size_t steps)
{
    std::mt19937_64 rng(seed);
    Space space({1024, 4096, 2});
    CollectiveAllocator alloc(space);

    struct Live {
        Handle h;
        SubAllocatorRef owner;
        std::size_t size;
    };
    std::vector<Live> live;
    std::vector<SubAllocatorRef> per_page;

    auto fail = [&](const std::string& what) { return "step invariant: " + what; };

    for (std::size_t step = 0; step < steps; ++step) {
        const std::size_t roll = rng() % 10;
        if (roll < 6 || live.empty()) {
            const std::size_t size = 16 * (1 + rng() % 24);
            SubAllocatorRef target;
            const std::size_t pick = rng() % 4;
            if (pick == 0)
                target = CollectiveAllocator::purely_local;
            else if (pick == 1)
                target = CollectiveAllocator::swappable_plain;
            else if (pick == 2 || per_page.empty()) {
                target = alloc.get_suballocator(Kind::new_per_page);
                per_page.push_back(target);
            } else {
                target = per_page[rng() % per_page.size()];
            }
            try {
                const Handle h = alloc.allocate(target, 1, {size, 16});
                live.push_back({h, target, size});
            } catch (const CapacityExhausted&) {
                if (target == CollectiveAllocator::swappable_plain)
                    return fail("swappable plain allocation failed");
            }
        } else if (roll < 9) {
            const std::size_t i = rng() % live.size();
            alloc.deallocate(live[i].h, 1, {live[i].size, 16});
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            const SwapStats before = space.stats();
            for (const Live& l : live)
                if (l.owner == CollectiveAllocator::purely_local)
                    space.touch(l.h, l.size, true);
            if (space.stats() != before)
                return fail("touching purely-local blocks changed swap statistics");
        }

        // Round trip and exclusive containment.
        std::map<std::uint32_t, std::size_t> bytes_by_owner;
        for (const Live& l : live) {
            if (!(alloc.get_suballocator(l.h) == l.owner))
                return fail("get_suballocator(handle) is not the allocating sub-allocator");
            if (!alloc.if_suballocator_contains(l.owner, l.h))
                return fail("allocating sub-allocator does not contain its handle");
            const SubAllocatorRef other = l.owner == CollectiveAllocator::swappable_plain
                                              ? CollectiveAllocator::purely_local
                                              : CollectiveAllocator::swappable_plain;
            if (alloc.if_suballocator_contains(other, l.h))
                return fail("two sub-allocators contain one handle");
            if (l.owner.kind == Kind::new_per_page && space.page_of(l.h) != alloc.page_of(l.owner))
                return fail("per-page handle outside its page");
            bytes_by_owner[l.owner.id] += align_up(l.size, Space::granule);
        }
        // Ownership partition: every page has exactly one owner, and per-page
        // sub-allocators own distinct pages.
        std::set<std::uint64_t> claimed;
        for (const SubAllocatorRef p : per_page) {
            const auto page = alloc.page_of(p);
            if (!page || !claimed.insert(page->index).second)
                return fail("per-page sub-allocators share a page");
            if (!(alloc.owner_of(*page) == p))
                return fail("page owner mismatch");
        }
        for (const PageId page : alloc.plain_pages()) {
            if (!claimed.insert(page.index).second)
                return fail("plain page also owned by a per-page sub-allocator");
            if (!(alloc.owner_of(page) == CollectiveAllocator::swappable_plain))
                return fail("plain page owner mismatch");
        }
        if (claimed.size() != space.page_count())
            return fail("a page has no owner");
        // Conservation.
        const std::vector<SubAllocatorRef> all = [&] {
            std::vector<SubAllocatorRef> v{CollectiveAllocator::purely_local, CollectiveAllocator::swappable_plain};
            v.insert(v.end(), per_page.begin(), per_page.end());
            return v;
        }();
        for (const SubAllocatorRef s : all)
            if (alloc.allocated_bytes(s) != bytes_by_owner[s.id])
                return fail("allocated bytes of sub-allocator " + std::to_string(s.id) + " drifted");
        if (space.purely_local_free_bytes() + bytes_by_owner[0] != 4096)
            return fail("purely-local bytes not conserved");
        if (space.live_blocks() != live.size())
            return fail("space and allocator disagree on live blocks");
    }
    return std::nullopt;
}

/// Random insert/search/update/scan sequence checked against std::map, with
/// an optional batch rearrangement halfway through. Returns the first
/// disagreement.
template <class C>
std::optional<std::string> run_against_map(C& c, std::uint64_t seed, std::size_t ops, std::size_t checkpoint_every,
                                           std::uint64_t key_space, bool rearrange_midway)
{
    std::mt19937_64 rng(seed);
    std::map<std::uint64_t, std::vector<std::byte>> ref;
    const std::size_t vs = c.options().value_size;
    auto at = [](std::size_t i, const std::string& what) { return "op " + std::to_string(i) + ": " + what; };

    for (std::size_t i = 0; i < ops; ++i) {
        if (rearrange_midway && i == ops / 2)
            c.make_page_aware();
        const std::uint64_t k = rng() % key_space;
        switch (rng() % 8) {
        case 0:
        case 1:
        case 2: {
            const auto v = make_value(k, i, vs);
            c.insert(k, v);
            ref.emplace(k, v);
            break;
        }
        case 3:
        case 4: {
            const auto got = c.search(k);
            const auto it = ref.find(k);
            if (got.has_value() != (it != ref.end()) || (got && *got != it->second))
                return at(i, "search disagrees");
            break;
        }
        case 5:
        case 6: {
            const auto v = make_value(k, ~i, vs);
            const bool hit = c.update(k, v);
            const auto it = ref.find(k);
            if (hit != (it != ref.end()))
                return at(i, "update hit disagrees");
            if (hit)
                it->second = v;
            break;
        }
        default: {
            const std::size_t len = 1 + rng() % 100;
            const auto got = c.scan(k, len);
            auto it = ref.lower_bound(k);
            std::size_t n = 0;
            for (; it != ref.end() && n < len; ++it, ++n)
                if (n >= got.size() || got[n].key != it->first || got[n].value != it->second)
                    return at(i, "scan disagrees at position " + std::to_string(n));
            if (got.size() != n)
                return at(i, "scan length disagrees");
            break;
        }
        }
        if ((i + 1) % checkpoint_every == 0 || i + 1 == ops) {
            if (auto err = c.validate())
                return at(i, "structure: " + *err);
            const auto entries = c.entries();
            if (entries.size() != ref.size() || c.size() != ref.size())
                return at(i, "size disagrees");
            auto it = ref.begin();
            for (const auto& e : entries) {
                if (e.key != it->first || e.value != it->second)
                    return at(i, "contents disagree");
                ++it;
            }
        }
    }
    return std::nullopt;
}

} // namespace farloc::testing
