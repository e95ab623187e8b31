#include "support.hpp"

#include "farloc/error.hpp"
#include "farloc/space.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace farloc;

namespace {

// First-fit over a granule bitmap: the lowest aligned start whose granules
// are all free. Independent of the extent lists the Space keeps.
struct BitmapFirstFit {
    std::vector<bool> used;

    explicit BitmapFirstFit(std::size_t bytes) : used(bytes / Space::granule, false) {}

    std::optional<std::size_t> carve(std::size_t bytes, std::size_t align)
    {
        const std::size_t n = (bytes + Space::granule - 1) / Space::granule;
        const std::size_t step = std::max<std::size_t>(1, align / Space::granule);
        for (std::size_t p = 0; p + n <= used.size(); p += step) {
            bool free = true;
            for (std::size_t i = p; i < p + n && free; ++i)
                free = !used[i];
            if (free) {
                std::fill(used.begin() + p, used.begin() + p + n, true);
                return p * Space::granule;
            }
        }
        return std::nullopt;
    }

    void release(std::size_t offset, std::size_t bytes)
    {
        const std::size_t p = offset / Space::granule;
        std::fill(used.begin() + p, used.begin() + p + (bytes + Space::granule - 1) / Space::granule, false);
    }
};

} // namespace

TEST_CASE("space configuration is validated")
{
    CHECK_NOTHROW(Space({4096, 0, 0}));
    CHECK_NOTHROW(Space({256, 0, 0}));
    CHECK_THROWS_AS(Space({0, 0, 0}), ConfigError);
    CHECK_THROWS_AS(Space({3000, 0, 0}), ConfigError);
    CHECK_THROWS_AS(Space({128, 0, 0}), ConfigError);
}

TEST_CASE("a fresh space is empty")
{
    Space space({4096, 2u << 20, 256});
    CHECK(space.stats() == SwapStats{});
    CHECK(space.page_count() == 0);
    CHECK(space.resident_pages() == 0);
    CHECK(space.purely_local_free_bytes() == (2u << 20));
    CHECK(space.page_size() == 4096);
}

TEST_CASE("purely-local carving is exact")
{
    Space space({4096, 128, 4});
    const Handle a = space.carve_purely_local(64);
    const Handle b = space.carve_purely_local(64);
    CHECK(a != b);
    CHECK_THROWS_AS(space.carve_purely_local(64), CapacityExhausted);
    CHECK_FALSE(space.page_of(a).has_value());
    CHECK(space.is_purely_local(b));

    space.release(a);
    CHECK(space.carve_purely_local(64) == a);
}

TEST_CASE("purely-local free list replays like a bitmap first-fit")
{
    constexpr std::size_t capacity = 8192;
    Space space({4096, capacity, 0});
    BitmapFirstFit model(capacity);
    std::mt19937_64 rng(7);
    std::vector<std::pair<Handle, std::size_t>> live;
    Handle base{};
    for (int step = 0; step < 4000; ++step) {
        if (live.empty() || rng() % 3 != 0) {
            const std::size_t bytes = 16 * (1 + rng() % 40);
            const std::size_t align = std::size_t{16} << (rng() % 3);
            const auto expect = model.carve(bytes, align);
            if (!expect) {
                CHECK_THROWS_AS(space.carve_purely_local(bytes, align), CapacityExhausted);
                continue;
            }
            const Handle h = space.carve_purely_local(bytes, align);
            if (!base)
                base = Handle{h.raw - *expect};
            REQUIRE(h.raw - base.raw == *expect);
            CHECK(h.raw % align == 0);
            live.emplace_back(h, bytes);
        } else {
            const std::size_t i = rng() % live.size();
            model.release(live[i].first.raw - base.raw, live[i].second);
            space.release(live[i].first);
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }
}

TEST_CASE("pages are fresh, zero-filled and non-resident")
{
    Space space({4096, 0, 4});
    std::set<std::uint64_t> ids;
    for (int i = 0; i < 10000; ++i)
        CHECK(ids.insert(space.create_page().index).second);
    CHECK(space.page_count() == 10000);

    const PageId p = space.create_page();
    CHECK_FALSE(space.is_resident(p));
    const Handle h = space.carve_in_page(p, 64);
    const auto bytes = space.access(h, Access::read);
    CHECK(space.stats().faults == 1);
    for (const std::byte b : bytes)
        CHECK(b == std::byte{0});
}

TEST_CASE("carving inside a page")
{
    Space space({4096, 0, 4});
    const PageId p = space.create_page();
    std::vector<Handle> hs;
    for (int i = 0; i < 4; ++i) {
        hs.push_back(space.carve_in_page(p, 1024));
        CHECK(space.page_of(hs.back()) == p);
    }
    CHECK_THROWS_AS(space.carve_in_page(p, 1024), CapacityExhausted);
    CHECK(space.page_used_bytes(p) == 4096);
    CHECK_THROWS_AS(space.carve_in_page(p, 8192), UsageError);

    const PageId q = space.create_page();
    const Handle a = space.carve_in_page(q, 512);
    const auto used = space.page_used_bytes(q);
    space.release(a);
    CHECK(space.carve_in_page(q, 512) == a);
    CHECK(space.page_used_bytes(q) == used);
}

TEST_CASE("page free lists replay like a bitmap first-fit and never straddle")
{
    Space space({1024, 0, 0});
    std::mt19937_64 rng(11);
    std::vector<PageId> pages;
    std::vector<BitmapFirstFit> models;
    for (int i = 0; i < 4; ++i) {
        pages.push_back(space.create_page());
        models.emplace_back(1024);
    }
    std::vector<std::tuple<Handle, std::size_t, std::size_t>> live; // handle, page slot, bytes
    for (int step = 0; step < 5000; ++step) {
        if (live.empty() || rng() % 3 != 0) {
            const std::size_t slot = rng() % pages.size();
            const std::size_t bytes = 16 * (1 + rng() % 20);
            const std::size_t align = std::size_t{16} << (rng() % 2);
            const auto expect = models[slot].carve(bytes, align);
            if (!expect) {
                CHECK_THROWS_AS(space.carve_in_page(pages[slot], bytes, align), CapacityExhausted);
                continue;
            }
            const Handle h = space.carve_in_page(pages[slot], bytes, align);
            REQUIRE(space.page_of(h) == pages[slot]);
            REQUIRE(h.raw % 1024 == *expect);
            REQUIRE(h.raw % 1024 + bytes <= 1024);
            live.emplace_back(h, slot, bytes);
        } else {
            const std::size_t i = rng() % live.size();
            const auto [h, slot, bytes] = live[i];
            models[slot].release(h.raw % 1024, bytes);
            space.release(h);
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }
}

TEST_CASE("purely-local touches never swap")
{
    Space space({4096, 4096, 1});
    const Handle h = space.carve_purely_local(64);
    for (int i = 0; i < 1000000; ++i)
        space.touch(h, 64, i % 2 == 0);
    CHECK(space.stats() == SwapStats{});
    CHECK(space.resident_pages() == 0);
}

TEST_CASE("single-slot cache swaps on every page change")
{
    Space space({4096, 0, 1});
    const Handle a = space.carve_in_page(space.create_page(), 64);
    const Handle b = space.carve_in_page(space.create_page(), 64);
    space.touch(a, 8, false);
    space.touch(b, 8, false);
    space.touch(a, 8, false);
    CHECK(space.stats().swap_ins == 3);
    CHECK(space.stats().faults == 3);
    CHECK(space.stats().write_backs == 0);
}

TEST_CASE("dirty pages are written back on eviction")
{
    Space space({4096, 0, 1});
    const Handle a = space.carve_in_page(space.create_page(), 64);
    const Handle b = space.carve_in_page(space.create_page(), 64);
    space.touch(a, 8, true);
    CHECK(space.is_dirty(*space.page_of(a)));
    space.touch(b, 8, false);
    CHECK(space.stats().write_backs == 1);
}

TEST_CASE("evict_all empties the cache")
{
    Space space({4096, 0, 4});
    space.evict_all();
    CHECK(space.stats() == SwapStats{});

    std::vector<Handle> hs;
    for (int i = 0; i < 3; ++i) {
        hs.push_back(space.carve_in_page(space.create_page(), 64));
        space.touch(hs.back(), 8, true);
    }
    CHECK(space.resident_pages() == 3);
    space.evict_all();
    CHECK(space.stats().write_backs == 3);
    CHECK(space.resident_pages() == 0);

    space.reset_stats();
    space.touch(hs[0], 8, false);
    CHECK(space.stats().swap_ins == 1);
}

TEST_CASE("touch spans every page it overlaps only within its block")
{
    Space space({4096, 0, 2});
    const Handle h = space.carve_in_page(space.create_page(), 256);
    CHECK_THROWS_AS(space.touch(h, 257, false), UsageError);
    CHECK_THROWS_AS(space.touch(h, 200, 100, false), UsageError);
    CHECK_NOTHROW(space.touch(h, 200, 56, false));
}

TEST_CASE("invalid handles fail fast")
{
    Space space({4096, 256, 2});
    const Handle h = space.carve_in_page(space.create_page(), 64);
    const Handle bogus{h.raw + 16};
    CHECK_THROWS_AS(space.touch(bogus, 8, false), UsageError);
    CHECK_THROWS_AS(space.page_of(bogus), UsageError);
    CHECK_THROWS_AS(space.release(bogus), UsageError);
    CHECK_THROWS_AS(space.touch(null_handle, 8, false), UsageError);
    space.release(h);
    CHECK_THROWS_AS(space.release(h), UsageError);
}

TEST_CASE("page_of is consistent within a page")
{
    Space space({4096, 256, 2});
    const PageId p = space.create_page();
    const Handle a = space.carve_in_page(p, 64);
    const Handle b = space.carve_in_page(p, 64);
    CHECK(space.page_of(a) == space.page_of(b));
    CHECK(space.page_of(a) == p);
    CHECK_FALSE(space.page_of(space.carve_purely_local(16)).has_value());
}

TEST_CASE("data written through access survives eviction")
{
    Space space({4096, 0, 1});
    const Handle a = space.carve_in_page(space.create_page(), 64);
    const Handle b = space.carve_in_page(space.create_page(), 64);
    space.access(a, Access::write)[5] = std::byte{42};
    space.access(b, Access::read);
    CHECK(space.access(a, Access::read)[5] == std::byte{42});
    CHECK(space.peek(a)[5] == std::byte{42});
}

TEST_CASE("LRU agrees with a brute-force model")
{
    const auto err = testing::lru_equivalence(3, 500, 8, 3, 200);
    CHECK_MESSAGE(!err, err.value_or(""));
}

TEST_CASE("faults equal swap-ins and residency stays bounded")
{
    Space space({512, 0, 3});
    std::vector<Handle> hs;
    for (int i = 0; i < 10; ++i)
        hs.push_back(space.carve_in_page(space.create_page(), 64));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        space.touch(hs[rng() % hs.size()], 8, rng() % 2 == 0);
        REQUIRE(space.resident_pages() <= 3);
        REQUIRE(space.stats().faults == space.stats().swap_ins);
    }
}

TEST_CASE("zero-capacity cache drops every page straight away")
{
    Space space({4096, 0, 0});
    const Handle h = space.carve_in_page(space.create_page(), 64);
    space.touch(h, 8, false);
    space.touch(h, 8, true);
    CHECK(space.stats().swap_ins == 2);
    CHECK(space.stats().write_backs == 1);
    CHECK(space.resident_pages() == 0);
}
