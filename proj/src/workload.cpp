#include "farloc/workload.hpp"

#include "farloc/btree.hpp"
#include "farloc/collective.hpp"
#include "farloc/error.hpp"
#include "farloc/hint_allocator.hpp"
#include "farloc/skiplist.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace farloc {

std::uint64_t fnv64(std::uint64_t x) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

double uniform01(std::mt19937_64& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ZipfSampler::ZipfSampler(std::size_t n, double alpha) : alpha_(alpha)
{
    if (n == 0)
        throw ConfigError("Zipf support must be non-empty");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("Zipf alpha must be a finite non-negative number");
    cdf_.resize(n);
    double sum = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        sum += std::pow(static_cast<double>(k), -alpha);
        cdf_[k - 1] = sum;
    }
}

std::size_t ZipfSampler::rank_for(double u) const
{
    const double target = u * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    const auto idx = static_cast<std::size_t>(it - cdf_.begin());
    return std::min(idx, cdf_.size() - 1) + 1;
}

std::size_t ZipfSampler::operator()(std::mt19937_64& rng) const
{
    return rank_for(uniform01(rng));
}

double ZipfSampler::pmf(std::size_t rank) const
{
    if (rank < 1 || rank > cdf_.size())
        return 0.0;
    return std::pow(static_cast<double>(rank), -alpha_) / cdf_.back();
}

std::size_t BenchConfig::pair_size() const noexcept
{
    return align_up(sizeof(std::uint64_t) + value_size, 16);
}

std::uint64_t BenchConfig::num_pairs() const noexcept
{
    return total_data_bytes / pair_size();
}

std::uint64_t BenchConfig::local_limit_bytes() const noexcept
{
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(total_data_bytes) * L_percent / 100.0));
}

SpaceConfig BenchConfig::space_config() const noexcept
{
    SpaceConfig sc;
    sc.page_size_bytes = page_size;
    const std::uint64_t limit = local_limit_bytes();
    if (uses_purely_local(variant)) {
        sc.purely_local_capacity_bytes = limit / 2;
        sc.cache_capacity_pages = (limit / 2) / page_size;
    } else {
        sc.purely_local_capacity_bytes = 0;
        sc.cache_capacity_pages = limit / page_size;
    }
    return sc;
}

void BenchConfig::validate() const
{
    if (value_size == 0)
        throw ConfigError("value size must be positive");
    if (num_pairs() == 0)
        throw ConfigError("total data of " + std::to_string(total_data_bytes) + " bytes holds no pair");
    if (!(L_percent > 0.0) || !std::isfinite(L_percent))
        throw ConfigError("L must be a positive percentage");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be a finite non-negative number");
    if (!(update_ratio >= 0.0 && update_ratio <= 1.0))
        throw ConfigError("update ratio must be in [0, 1]");
    if (scan_len_max == 0)
        throw ConfigError("maximum scan length must be positive");
    if (page_size < 256 || !is_power_of_two(page_size))
        throw ConfigError("page size must be a power of two of at least 256 bytes");
}

std::vector<std::uint64_t> placement_keys(const BenchConfig& cfg)
{
    const std::uint64_t n = cfg.num_pairs();
    std::vector<std::uint64_t> keys;
    keys.reserve(n);
    for (std::uint64_t i = n; i-- > 0;)
        keys.push_back(fnv64(i));
    return keys;
}

void fill_value(std::mt19937_64& rng, std::span<std::byte> out) noexcept
{
    for (std::size_t i = 0; i < out.size(); i += 8) {
        const std::uint64_t word = rng();
        std::memcpy(out.data() + i, &word, std::min<std::size_t>(8, out.size() - i));
    }
}

std::mt19937_64 make_stream(std::uint64_t seed, Stream s)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    return std::mt19937_64(seq);
}

std::vector<QueryOp> query_script(const BenchConfig& cfg)
{
    const ZipfSampler zipf(cfg.num_pairs(), cfg.alpha);
    auto rng = make_stream(cfg.seed, Stream::queries);
    auto values = make_stream(cfg.seed, Stream::update_values);
    std::vector<QueryOp> ops(cfg.num_queries);
    for (QueryOp& op : ops) {
        const std::size_t rank = zipf(rng);
        const double kind = uniform01(rng);
        const double len = uniform01(rng);
        op.key = fnv64(rank - 1);
        if (kind < cfg.update_ratio) {
            op.kind = QueryOp::Kind::update;
            op.value.resize(cfg.value_size);
            fill_value(values, op.value);
        } else {
            op.kind = QueryOp::Kind::scan;
            op.scan_len = std::min(cfg.scan_len_max, 1 + static_cast<std::size_t>(len * cfg.scan_len_max));
        }
    }
    return ops;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class C>
void run_phases(C& c, Space& space, const BenchConfig& cfg, BenchReport& r)
{
    const auto t0 = Clock::now();
    auto values = make_stream(cfg.seed, Stream::placement_values);
    std::vector<std::byte> value(cfg.value_size);
    for (const std::uint64_t k : placement_keys(cfg)) {
        fill_value(values, value);
        c.insert(k, value);
    }
    if (cfg.rearrange)
        c.make_page_aware();
    r.placement = space.stats();
    r.node_count = c.node_count();
    if (c.node_count() >= 2) {
        r.links = link_composition(c);
        if constexpr (std::is_same_v<C, BTree>)
            r.parent_page_mismatch = parent_page_mismatch_fraction(c);
    }
    r.placement_seconds = seconds_since(t0);

    space.evict_all();
    space.reset_stats();

    const auto t1 = Clock::now();
    const auto script = query_script(cfg);
    const auto ignore = [](std::uint64_t, std::span<const std::byte>) {};
    for (const QueryOp& op : script) {
        if (op.kind == QueryOp::Kind::scan) {
            r.scanned_pairs += c.scan(op.key, op.scan_len, ignore);
        } else {
            if (!c.update(op.key, op.value))
                throw std::logic_error("query key was never inserted");
            ++r.updates;
        }
        r.max_resident_pages = std::max(r.max_resident_pages, space.resident_pages());
    }
    r.measurement = space.stats();
    r.measurement_seconds = seconds_since(t1);
}

} // namespace

BenchReport run_benchmark(const BenchConfig& cfg)
{
    cfg.validate();
    BenchReport r;
    r.config = cfg;
    r.space = cfg.space_config();
    r.num_pairs = cfg.num_pairs();
    Space space(r.space);

    if (cfg.variant.container == Container::btree) {
        const BTreeOptions opts{cfg.variant.btree, cfg.btree_max_keys, cfg.value_size};
        if (cfg.variant.btree == BTreeVariant::hint) {
            HintAllocator alloc(space);
            BTree tree(alloc, opts);
            run_phases(tree, space, cfg, r);
        } else {
            CollectiveAllocator alloc(space);
            BTree tree(alloc, opts);
            run_phases(tree, space, cfg, r);
        }
    } else {
        SkipListOptions opts;
        opts.variant = cfg.variant.skiplist;
        opts.value_size = cfg.value_size;
        opts.max_level = cfg.skiplist_max_level;
        opts.seed = make_stream(cfg.seed, Stream::levels)();
        if (cfg.variant.skiplist == SkipListVariant::hint) {
            HintAllocator alloc(space);
            SkipList list(alloc, opts);
            run_phases(list, space, cfg, r);
        } else {
            CollectiveAllocator alloc(space);
            SkipList list(alloc, opts);
            run_phases(list, space, cfg, r);
        }
    }
    return r;
}

} // namespace farloc
