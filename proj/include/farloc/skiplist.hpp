#pragma once

#include "farloc/collective.hpp"
#include "farloc/hint_allocator.hpp"
#include "farloc/space.hpp"
#include "farloc/variant.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace farloc {

struct SkipListOptions {
    SkipListVariant variant = SkipListVariant::plain;
    std::size_t value_size = 150;
    std::size_t max_level = 20;
    double p = 0.5;
    std::uint64_t seed = 1; ///< level generator
};

/// Skip list whose nodes live in a simulated Space. The head tower is kept
/// outside the space; it is not a node and has no links of its own.
///
/// Nodes are linked into a priority list ordered by non-increasing level.
/// In the purely-local variants the purely-local nodes are a prefix of it.
/// A new node is placed by probing the sub-allocator that owns its
/// priority-list predecessor (the last node whose level is at least the new
/// node's), with the same least-priority eviction as the B-tree.
class SkipList {
public:
    using Key = std::uint64_t;
    using Visitor = std::function<void(Key, std::span<const std::byte>)>;

    struct Entry {
        Key key;
        std::vector<std::byte> value;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    static constexpr double page_fill_threshold = 0.7;

    SkipList(CollectiveAllocator& alloc, SkipListOptions options);
    SkipList(HintAllocator& alloc, SkipListOptions options);

    SkipList(const SkipList&) = delete;
    SkipList& operator=(const SkipList&) = delete;

    /// Inserts k -> value; an existing key is left untouched.
    void insert(Key k, std::span<const std::byte> value);
    std::optional<std::vector<std::byte>> search(Key k);
    bool update(Key k, std::span<const std::byte> value);
    /// Up to len pairs in key order starting at k or its successor.
    std::size_t scan(Key k, std::size_t len, const Visitor& visit);
    std::vector<Entry> scan(Key k, std::size_t len);

    /// Runs the variant's batch rearrangement, if it has one.
    void make_page_aware();
    /// Key-order sweep onto per-page sub-allocators.
    void make_page_aware_page();
    /// Key-order sweep through the hint allocator.
    void make_page_aware_hint();

    Handle relocate_to_swappable(Handle node);
    Handle relocate_to_page(Handle node, SubAllocatorRef dest);

    // Inspection. None of these affect residency or swap statistics.
    SkipListVariant variant() const noexcept { return options_.variant; }
    const SkipListOptions& options() const noexcept { return options_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t node_count() const noexcept { return size_; }
    /// Highest node level present (0 when empty).
    std::size_t level() const noexcept { return level_; }
    std::size_t node_bytes(std::size_t level) const;
    std::size_t level_of(Handle node) const;
    Key key_of(Handle node) const;
    std::vector<Handle> forwards_of(Handle node) const;
    Handle head_forward(std::size_t i) const { return head_.at(i); }
    Handle least_priority() const noexcept { return least_priority_; }
    std::vector<Handle> priority_list() const;
    /// Nodes in key order.
    void for_each_node(const std::function<void(Handle)>& fn) const;
    /// Every forward edge between two nodes, at every level.
    void for_each_edge(const std::function<void(Handle, Handle)>& fn) const;
    std::vector<Entry> entries() const;
    const std::vector<SubAllocatorRef>& rearrangement_pages() const noexcept { return rearrangement_pages_; }
    std::optional<std::string> validate() const;

    const Space& space() const noexcept { return *space_; }
    CollectiveAllocator* collective() noexcept { return alloc_; }
    HintAllocator* hint_allocator() noexcept { return hint_; }

private:
    class Node;
    class ConstNode;

    SkipList(Space& space, CollectiveAllocator* alloc, HintAllocator* hint, SkipListOptions options);

    Node write(Handle h);
    ConstNode read(Handle h);
    ConstNode peek(Handle h) const;
    ObjectLayout layout(std::size_t level) const;

    std::size_t random_level();
    Handle forward(Handle from, std::size_t i);
    void set_forward(Handle from, std::size_t i, Handle to);
    /// First node with key >= k and its bytes; fills the rightmost node
    /// with key < k at every level (null = head) when preds is given.
    std::pair<Handle, const std::byte*> seek(Key k, std::vector<Handle>* preds);
    Handle priority_predecessor(std::size_t level) const;

    Handle allocate_in(SubAllocatorRef sub, std::size_t level);
    Handle place(std::size_t level, Handle priority_pred, Handle key_pred);
    Handle place_with_eviction(Handle node, SubAllocatorRef sub, std::size_t level);
    void link_priority_after(Handle pred, Handle fresh, std::size_t level);
    Handle remap(Handle h) const;

    Handle move_node(Handle from, Handle to, std::span<const Handle> preds);
    void free_node(Handle h, std::size_t level);
    template <class Destination>
    void sweep(Destination&& dest);

    Space* space_;
    CollectiveAllocator* alloc_;
    HintAllocator* hint_;
    SkipListOptions options_;

    // Node block layout: key, level, prev, next, value, forwards[level].
    std::size_t off_value_;
    std::size_t off_forwards_;

    std::vector<Handle> head_;       // head tower, max_level forwards
    std::vector<Handle> group_tail_; // last priority-list node of each level
    Handle plist_head_;
    Handle plist_tail_;
    Handle least_priority_;
    std::size_t level_ = 0;
    std::size_t size_ = 0;
    std::mt19937_64 rng_;

    std::vector<std::pair<Handle, Handle>> moved_;
    std::vector<SubAllocatorRef> rearrangement_pages_;
};

} // namespace farloc
