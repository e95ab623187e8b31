#pragma once

#include "farloc/metrics.hpp"
#include "farloc/space.hpp"
#include "farloc/variant.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace farloc {

/// FNV-1a, 64-bit, over the 8 little-endian bytes of x.
std::uint64_t fnv64(std::uint64_t x) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng) noexcept;

/// Zipf(N, alpha) over ranks 1..N by inverse CDF on a cumulative table.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double alpha);

    std::size_t operator()(std::mt19937_64& rng) const;
    /// Rank for a uniform u in [0, 1).
    std::size_t rank_for(double u) const;
    double pmf(std::size_t rank) const;
    std::size_t n() const noexcept { return cdf_.size(); }
    double alpha() const noexcept { return alpha_; }

private:
    double alpha_;
    std::vector<double> cdf_; // cdf_[k-1] = sum of i^-alpha for i <= k
};

struct BenchConfig {
    std::uint64_t total_data_bytes = 16u << 20;
    std::size_t value_size = 150;
    double L_percent = 50;
    double alpha = 0.8;
    double update_ratio = 0.05;
    std::size_t num_queries = 2000;
    std::size_t scan_len_max = 100;
    std::size_t page_size = 4096;
    ContainerVariant variant;
    std::uint64_t seed = 42;
    /// Run the variant's batch rearrangement after the inserts.
    bool rearrange = true;
    std::size_t btree_max_keys = 4;
    std::size_t skiplist_max_level = 20;

    /// Key plus value, rounded up to 16 bytes.
    std::size_t pair_size() const noexcept;
    /// Number of pairs, total_data_bytes / pair_size rounded down.
    std::uint64_t num_pairs() const noexcept;
    /// Local memory limit L in bytes.
    std::uint64_t local_limit_bytes() const noexcept;
    /// The Space a run uses: L split in half between the purely-local region
    /// and the page cache when the variant uses the purely-local region,
    /// otherwise all of L is page cache.
    SpaceConfig space_config() const noexcept;
    /// Throws ConfigError.
    void validate() const;
};

struct QueryOp {
    enum class Kind { scan, update };

    Kind kind = Kind::scan;
    std::uint64_t key = 0;
    std::size_t scan_len = 0;
    std::vector<std::byte> value; ///< update only

    friend bool operator==(const QueryOp&, const QueryOp&) = default;
};

/// fnv64(N-1), fnv64(N-2), ..., fnv64(0).
std::vector<std::uint64_t> placement_keys(const BenchConfig& cfg);

/// Random value bytes, 8 bytes per draw.
void fill_value(std::mt19937_64& rng, std::span<std::byte> out) noexcept;

/// Independent generator streams derived from the seed.
enum class Stream : std::uint64_t { placement_values = 1, queries = 2, update_values = 3, levels = 4 };
std::mt19937_64 make_stream(std::uint64_t seed, Stream s);

/// The measurement-phase queries. Each query draws the same number of
/// numbers from the query stream whatever U is, so the key sequence does not
/// depend on U.
std::vector<QueryOp> query_script(const BenchConfig& cfg);

struct BenchReport {
    BenchConfig config;
    SpaceConfig space;
    std::uint64_t num_pairs = 0;
    std::size_t node_count = 0;
    SwapStats placement;   ///< inserts and rearrangement
    SwapStats measurement; ///< queries only, after evict_all and reset
    std::optional<LinkComposition> links;
    std::optional<double> parent_page_mismatch; ///< B-tree only
    std::size_t max_resident_pages = 0;         ///< during measurement
    std::size_t scanned_pairs = 0;
    std::size_t updates = 0;
    double placement_seconds = 0;
    double measurement_seconds = 0;
};

/// The two-phase benchmark: inserts, optional rearrangement, link snapshot,
/// evict_all + reset_stats, then the query script.
BenchReport run_benchmark(const BenchConfig& cfg);

} // namespace farloc
