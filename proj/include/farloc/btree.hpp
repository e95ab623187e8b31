#pragma once

#include "farloc/collective.hpp"
#include "farloc/hint_allocator.hpp"
#include "farloc/space.hpp"
#include "farloc/variant.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace farloc {

struct BTreeOptions {
    BTreeVariant variant = BTreeVariant::plain;
    std::size_t max_keys = 4; ///< order - 1
    std::size_t value_size = 150;
};

/// Classic B-tree (pairs in every node) whose nodes live in a simulated
/// Space. Every node visit goes through the Space, so queries produce the
/// page traffic the node placement implies.
///
/// Nodes carry parent links and prev/next links forming the priority list:
/// all nodes ordered by depth, root first. In purely-local variants the
/// nodes placed in the purely-local region are exactly a prefix of that
/// list, ending at least_priority().
///
/// Placement on split depends on the variant:
///  - plain: swappable plain sub-allocator.
///  - hint: hint allocator with the split node's parent as the hint.
///  - local: the split node's own sub-allocator; when the purely-local
///    region is full the least-priority resident node is evicted to the
///    swappable region to make room.
///  - dfs / veb / local+dfs / local+veb: the parent's sub-allocator, falling
///    back to swappable plain (and, with the purely-local region, the same
///    eviction as local). Their batch rearrangement moves swappable nodes
///    onto per-page sub-allocators in post-order or van Emde Boas order.
class BTree {
public:
    using Key = std::uint64_t;
    using Visitor = std::function<void(Key, std::span<const std::byte>)>;

    struct Entry {
        Key key;
        std::vector<std::byte> value;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    static constexpr double page_fill_threshold = 0.7;

    BTree(CollectiveAllocator& alloc, BTreeOptions options);
    BTree(HintAllocator& alloc, BTreeOptions options);

    BTree(const BTree&) = delete;
    BTree& operator=(const BTree&) = delete;

    /// Inserts k -> value; an existing key is left untouched.
    void insert(Key k, std::span<const std::byte> value);
    std::optional<std::vector<std::byte>> search(Key k);
    /// In-place overwrite of an existing pair. False if k is absent.
    bool update(Key k, std::span<const std::byte> value);
    /// Up to len pairs in key order starting at k, or at its successor when
    /// k is absent. Returns the number of pairs visited.
    std::size_t scan(Key k, std::size_t len, const Visitor& visit);
    std::vector<Entry> scan(Key k, std::size_t len);

    /// Runs the variant's batch rearrangement, if it has one.
    void make_page_aware();
    void make_page_aware_dfs();
    void make_page_aware_veb();
    void make_page_aware_hint();

    Handle relocate_to_swappable(Handle node);
    Handle relocate_to_page(Handle node, SubAllocatorRef dest);

    // Inspection. None of these affect residency or swap statistics.
    BTreeVariant variant() const noexcept { return options_.variant; }
    const BTreeOptions& options() const noexcept { return options_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t node_bytes() const noexcept { return node_bytes_; }
    std::size_t height() const;
    Handle root() const noexcept { return root_; }
    Handle least_priority() const noexcept { return least_priority_; }
    std::vector<Handle> priority_list() const;
    Handle parent_of(Handle node) const;
    std::vector<Handle> children_of(Handle node) const;
    std::vector<Key> keys_of(Handle node) const;
    /// Every node with its depth (root = 0), pre-order.
    void for_each_node(const std::function<void(Handle, std::size_t)>& fn) const;
    /// Every parent -> child edge.
    void for_each_edge(const std::function<void(Handle, Handle)>& fn) const;
    std::vector<Entry> entries() const;
    /// Per-page sub-allocators created by the last collective rearrangement.
    const std::vector<SubAllocatorRef>& rearrangement_pages() const noexcept { return rearrangement_pages_; }
    /// First violated structural invariant, if any.
    std::optional<std::string> validate() const;

    const Space& space() const noexcept { return *space_; }
    CollectiveAllocator* collective() noexcept { return alloc_; }
    HintAllocator* hint_allocator() noexcept { return hint_; }

private:
    class Node;
    class ConstNode;
    struct Split {
        Handle baby;
        Key key;
        std::vector<std::byte> value;
    };

    BTree(Space& space, CollectiveAllocator* alloc, HintAllocator* hint, BTreeOptions options);

    Node write(Handle h);
    ConstNode read(Handle h);
    ConstNode peek(Handle h) const;

    std::optional<Split> insert_rec(Handle node, Key k, std::span<const std::byte> value);
    Split split_node(Handle node, std::size_t pos, Key k, std::span<const std::byte> value, Handle right_child);
    void create_root(Key k, std::span<const std::byte> value);
    void grow_root(Split split);

    Handle allocate_in(SubAllocatorRef sub);
    Handle place_split(Handle node);
    Handle place_front(Handle anchor);
    Handle place_with_eviction(Handle node, SubAllocatorRef sub);
    void link_after(Handle node, Handle fresh);
    Handle remap(Handle h) const;

    Handle move_node(Handle from, Handle to);
    void free_node(Handle h);

    Handle dfs_visit(Handle node, SubAllocatorRef& page);
    Handle veb_visit(Handle node, std::size_t height, SubAllocatorRef& page);
    Handle page_step(Handle node, SubAllocatorRef& page);
    Handle hint_visit(Handle node, Handle& previous);
    void descendants_at(Handle node, std::size_t generations, std::vector<Handle>& out);

    Space* space_;
    CollectiveAllocator* alloc_;
    HintAllocator* hint_;
    BTreeOptions options_;

    // Node block layout.
    std::size_t order_;
    std::size_t off_children_;
    std::size_t off_keys_;
    std::size_t off_values_;
    std::size_t node_bytes_;
    ObjectLayout layout_;

    Handle root_;
    Handle head_; // priority list
    Handle tail_;
    Handle least_priority_;
    std::size_t size_ = 0;
    std::size_t node_count_ = 0;

    std::vector<std::pair<Handle, Handle>> moved_; // relocations during the current placement
    std::vector<SubAllocatorRef> rearrangement_pages_;
};

} // namespace farloc
