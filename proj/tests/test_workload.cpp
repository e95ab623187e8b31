#include "support.hpp"

#include "farloc/error.hpp"
#include "farloc/workload.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <string_view>

using namespace farloc;

namespace {

// Textbook FNV-1a over a byte string.
std::uint64_t fnv1a_bytes(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string le_bytes(std::uint64_t x)
{
    std::string s(8, '\0');
    for (int i = 0; i < 8; ++i)
        s[static_cast<std::size_t>(i)] = static_cast<char>((x >> (8 * i)) & 0xff);
    return s;
}

BenchConfig small_config(ContainerVariant v, double l_percent = 50)
{
    BenchConfig cfg;
    cfg.total_data_bytes = 1u << 20;
    cfg.num_queries = 500;
    cfg.variant = v;
    cfg.L_percent = l_percent;
    return cfg;
}

} // namespace

TEST_CASE("FNV-1a matches the published vectors and a byte-wise reference")
{
    CHECK(fnv1a_bytes("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a_bytes("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a_bytes("foobar") == 0x85944171f73967e8ull);
    for (const std::uint64_t x : {0ull, 1ull, 255ull, 256ull, 0x0123456789abcdefull, ~0ull})
        CHECK(fnv64(x) == fnv1a_bytes(le_bytes(x)));
}

TEST_CASE("FNV keys of the default workload are distinct")
{
    BenchConfig cfg;
    const auto keys = placement_keys(cfg);
    CHECK(keys.size() == 104857);
    CHECK(std::set<std::uint64_t>(keys.begin(), keys.end()).size() == keys.size());
    CHECK(keys.front() == fnv64(104856));
    CHECK(keys.back() == fnv64(0));
}

TEST_CASE("default sizes")
{
    BenchConfig cfg;
    CHECK(cfg.pair_size() == 160);
    CHECK(cfg.num_pairs() == 104857);
    CHECK(cfg.local_limit_bytes() == 8u << 20);
    const SpaceConfig plain = cfg.space_config();
    CHECK(plain.purely_local_capacity_bytes == 0);
    CHECK(plain.cache_capacity_pages == 2048);
    cfg.variant = ContainerVariant::of(BTreeVariant::local);
    const SpaceConfig local = cfg.space_config();
    CHECK(local.purely_local_capacity_bytes == 4u << 20);
    CHECK(local.cache_capacity_pages == 1024);
    cfg.L_percent = 5;
    CHECK(cfg.local_limit_bytes() == 838860);
}

TEST_CASE("configuration validation")
{
    BenchConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = [](auto mutate) {
        BenchConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    bad([](BenchConfig& c) { c.alpha = -0.1; });
    bad([](BenchConfig& c) { c.alpha = NAN; });
    bad([](BenchConfig& c) { c.update_ratio = 1.5; });
    bad([](BenchConfig& c) { c.L_percent = 0; });
    bad([](BenchConfig& c) { c.page_size = 3000; });
    bad([](BenchConfig& c) { c.total_data_bytes = 100; });
    bad([](BenchConfig& c) { c.value_size = 0; });
}

TEST_CASE("Zipf sampler")
{
    SUBCASE("alpha 0 is uniform")
    {
        const ZipfSampler z(100, 0.0);
        for (std::size_t k = 1; k <= 100; ++k)
            CHECK(z.pmf(k) == doctest::Approx(0.01));
        CHECK(z.rank_for(0.0) == 1);
        CHECK(z.rank_for(0.505) == 51);
        CHECK(z.rank_for(std::nextafter(1.0, 0.0)) == 100);
    }
    SUBCASE("rank probabilities follow the power law")
    {
        const ZipfSampler z(1000, 0.8);
        CHECK(z.pmf(1) / z.pmf(2) == doctest::Approx(std::pow(2.0, 0.8)));
        CHECK(z.pmf(0) == 0.0);
        CHECK(z.pmf(1001) == 0.0);
        double sum = 0;
        for (std::size_t k = 1; k <= 1000; ++k)
            sum += z.pmf(k);
        CHECK(sum == doctest::Approx(1.0));
    }
    SUBCASE("empirical frequencies stay within four standard errors")
    {
        const ZipfSampler z(1000, 0.8);
        std::mt19937_64 rng(3);
        constexpr int draws = 200000;
        std::vector<int> hits(1001, 0);
        for (int i = 0; i < draws; ++i) {
            const std::size_t r = z(rng);
            REQUIRE(r >= 1);
            REQUIRE(r <= 1000);
            ++hits[r];
        }
        for (const std::size_t k : {1u, 2u, 10u, 100u}) {
            const double p = z.pmf(k);
            const double se = std::sqrt(p * (1 - p) / draws);
            CHECK(std::abs(hits[k] / double(draws) - p) < 4 * se);
        }
    }
    CHECK_THROWS_AS(ZipfSampler(0, 1.0), ConfigError);
    CHECK_THROWS_AS(ZipfSampler(10, -1.0), ConfigError);
}

TEST_CASE("query script")
{
    BenchConfig cfg = small_config(ContainerVariant::of(BTreeVariant::plain));
    const auto keys = placement_keys(cfg);
    const std::set<std::uint64_t> key_set(keys.begin(), keys.end());

    cfg.update_ratio = 0;
    const auto scans = query_script(cfg);
    cfg.update_ratio = 1;
    const auto updates = query_script(cfg);
    cfg.update_ratio = 0.05;
    const auto mixed = query_script(cfg);

    REQUIRE(scans.size() == 500);
    std::size_t n_updates = 0;
    for (std::size_t i = 0; i < scans.size(); ++i) {
        CHECK(scans[i].kind == QueryOp::Kind::scan);
        CHECK(scans[i].scan_len >= 1);
        CHECK(scans[i].scan_len <= 100);
        CHECK(updates[i].kind == QueryOp::Kind::update);
        CHECK(updates[i].value.size() == cfg.value_size);
        CHECK(key_set.contains(scans[i].key));
        // Same key sequence whatever the update ratio.
        CHECK(updates[i].key == scans[i].key);
        CHECK(mixed[i].key == scans[i].key);
        n_updates += mixed[i].kind == QueryOp::Kind::update;
    }
    CHECK(n_updates > 5);
    CHECK(n_updates < 60);
    CHECK(query_script(cfg) == mixed);
}

TEST_CASE("generator streams are independent of each other")
{
    auto a = make_stream(42, Stream::queries);
    auto b = make_stream(42, Stream::placement_values);
    auto c = make_stream(42, Stream::queries);
    const auto x = a();
    CHECK(x != b());
    CHECK(x == c());
    auto d = make_stream(43, Stream::queries);
    CHECK(x != d());
}

TEST_CASE("benchmark runs are deterministic and phase-isolated")
{
    for (const ContainerVariant v :
         {ContainerVariant::of(BTreeVariant::plain), ContainerVariant::of(BTreeVariant::local_dfs),
          ContainerVariant::of(SkipListVariant::plain), ContainerVariant::of(SkipListVariant::local_page)}) {
        CAPTURE(to_string(v));
        const BenchConfig cfg = small_config(v, 10);
        const BenchReport a = run_benchmark(cfg);
        const BenchReport b = run_benchmark(cfg);
        CHECK(a.measurement == b.measurement);
        CHECK(a.placement == b.placement);
        CHECK(a.links == b.links);
        CHECK(a.num_pairs == 6553);
        CHECK(a.measurement.faults == a.measurement.swap_ins);
        CHECK(a.max_resident_pages <= a.space.cache_capacity_pages);
        CHECK(a.max_resident_pages > 0);
        CHECK(a.scanned_pairs + a.updates > 500);
        CHECK(a.links.has_value());
        CHECK(a.parent_page_mismatch.has_value() == (v.container == Container::btree));
    }
}

TEST_CASE("a small local limit swaps for plain placement")
{
    const BenchReport r = run_benchmark(small_config(ContainerVariant::of(BTreeVariant::plain), 5));
    CHECK(r.measurement.swap_ins > 0);
    // Scans only read.
    BenchConfig ro = small_config(ContainerVariant::of(BTreeVariant::plain), 5);
    ro.update_ratio = 0;
    CHECK(run_benchmark(ro).measurement.write_backs == 0);
}

TEST_CASE("a different seed changes the measurement")
{
    BenchConfig cfg = small_config(ContainerVariant::of(BTreeVariant::plain), 5);
    const auto a = run_benchmark(cfg).measurement;
    cfg.seed = 7;
    CHECK(run_benchmark(cfg).measurement != a);
}
