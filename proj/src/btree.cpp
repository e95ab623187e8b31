#include "farloc/btree.hpp"

#include "farloc/error.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

namespace farloc {

namespace {

template <class T>
T load(const std::byte* p) noexcept
{
    T v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

template <class T>
void store(std::byte* p, T v) noexcept
{
    std::memcpy(p, &v, sizeof v);
}

// Node header: key count, parent, priority prev/next.
constexpr std::size_t off_count = 0;
constexpr std::size_t off_parent = 8;
constexpr std::size_t off_prev = 16;
constexpr std::size_t off_next = 24;
constexpr std::size_t header_bytes = 32;

} // namespace

class BTree::ConstNode {
public:
    ConstNode(const std::byte* p, const BTree* tree) : p_(p), t_(tree) {}

    std::size_t count() const { return load<std::uint32_t>(p_ + off_count); }
    Handle parent() const { return {load<std::uint64_t>(p_ + off_parent)}; }
    Handle prev() const { return {load<std::uint64_t>(p_ + off_prev)}; }
    Handle next() const { return {load<std::uint64_t>(p_ + off_next)}; }
    Handle child(std::size_t i) const { return {load<std::uint64_t>(p_ + t_->off_children_ + 8 * i)}; }
    Key key(std::size_t i) const { return load<std::uint64_t>(p_ + t_->off_keys_ + 8 * i); }
    std::span<const std::byte> value(std::size_t i) const
    {
        return {p_ + t_->off_values_ + i * t_->options_.value_size, t_->options_.value_size};
    }
    bool is_leaf() const { return child(0).is_null(); }

    std::size_t lower_bound(Key k) const
    {
        std::size_t lo = 0;
        std::size_t hi = count();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (key(mid) < k)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

    std::size_t index_of_child(Handle c) const
    {
        const std::size_t n = count();
        for (std::size_t i = 0; i <= n; ++i)
            if (child(i) == c)
                return i;
        return n + 1;
    }

protected:
    const std::byte* p_;
    const BTree* t_;
};

class BTree::Node : public ConstNode {
public:
    Node(std::byte* p, const BTree* tree) : ConstNode(p, tree), w_(p) {}

    void set_count(std::size_t n) { store(w_ + off_count, static_cast<std::uint32_t>(n)); }
    void set_parent(Handle h) { store(w_ + off_parent, h.raw); }
    void set_prev(Handle h) { store(w_ + off_prev, h.raw); }
    void set_next(Handle h) { store(w_ + off_next, h.raw); }
    void set_child(std::size_t i, Handle h) { store(w_ + t_->off_children_ + 8 * i, h.raw); }
    void set_key(std::size_t i, Key k) { store(w_ + t_->off_keys_ + 8 * i, k); }
    void set_value(std::size_t i, std::span<const std::byte> v)
    {
        std::memcpy(w_ + t_->off_values_ + i * t_->options_.value_size, v.data(), t_->options_.value_size);
    }

private:
    std::byte* w_;
};

BTree::BTree(CollectiveAllocator& alloc, BTreeOptions options) : BTree(alloc.space(), &alloc, nullptr, options)
{
    if (options.variant == BTreeVariant::hint)
        throw ConfigError("the hint B-tree runs on a HintAllocator");
}

BTree::BTree(HintAllocator& alloc, BTreeOptions options) : BTree(alloc.space(), nullptr, &alloc, options)
{
    if (options.variant != BTreeVariant::hint)
        throw ConfigError("only the hint B-tree runs on a HintAllocator");
}

BTree::BTree(Space& space, CollectiveAllocator* alloc, HintAllocator* hint, BTreeOptions options)
    : space_(&space), alloc_(alloc), hint_(hint), options_(options)
{
    if (options_.max_keys < 2)
        throw ConfigError("B-tree nodes need at least 2 keys");
    if (options_.value_size == 0)
        throw ConfigError("value size must be positive");
    order_ = options_.max_keys + 1;
    off_children_ = header_bytes;
    off_keys_ = off_children_ + 8 * order_;
    off_values_ = off_keys_ + 8 * options_.max_keys;
    node_bytes_ = align_up(off_values_ + options_.max_keys * options_.value_size, Space::granule);
    if (node_bytes_ > space.page_size())
        throw ConfigError("a B-tree node of " + std::to_string(node_bytes_) + " bytes does not fit in a page");
    layout_ = {node_bytes_, 8};
}

BTree::Node BTree::write(Handle h)
{
    return Node(space_->access(h, Access::write).data(), this);
}

BTree::ConstNode BTree::read(Handle h)
{
    return ConstNode(space_->access(h, Access::read).data(), this);
}

BTree::ConstNode BTree::peek(Handle h) const
{
    return ConstNode(space_->peek(h).data(), this);
}

// ---------------------------------------------------------------------------
// queries

std::optional<std::vector<std::byte>> BTree::search(Key k)
{
    for (Handle node = root_; node;) {
        const ConstNode n = read(node);
        const std::size_t pos = n.lower_bound(k);
        if (pos < n.count() && n.key(pos) == k) {
            const auto v = n.value(pos);
            return std::vector<std::byte>(v.begin(), v.end());
        }
        if (n.is_leaf())
            break;
        node = n.child(pos);
    }
    return std::nullopt;
}

bool BTree::update(Key k, std::span<const std::byte> value)
{
    if (value.size() != options_.value_size)
        throw UsageError("value size mismatch");
    for (Handle node = root_; node;) {
        const ConstNode n = read(node);
        const std::size_t pos = n.lower_bound(k);
        if (pos < n.count() && n.key(pos) == k) {
            write(node).set_value(pos, value);
            return true;
        }
        if (n.is_leaf())
            break;
        node = n.child(pos);
    }
    return false;
}

std::size_t BTree::scan(Key k, std::size_t len, const Visitor& visit)
{
    if (!root_ || len == 0)
        return 0;

    Handle node = root_;
    ConstNode n = read(node);
    std::size_t pos = 0;
    for (;;) {
        pos = n.lower_bound(k);
        if ((pos < n.count() && n.key(pos) == k) || n.is_leaf())
            break;
        node = n.child(pos);
        n = read(node);
    }

    // In-order walk from (node, pos) using parent links.
    std::size_t visited = 0;
    while (visited < len) {
        if (pos >= n.count()) {
            Handle child = node;
            Handle parent = n.parent();
            bool resumed = false;
            while (parent) {
                const ConstNode p = read(parent);
                const std::size_t i = p.index_of_child(child);
                if (i < p.count()) {
                    node = parent;
                    n = p;
                    pos = i;
                    resumed = true;
                    break;
                }
                child = parent;
                parent = p.parent();
            }
            if (!resumed)
                break;
            continue;
        }
        visit(n.key(pos), n.value(pos));
        ++visited;
        if (n.is_leaf()) {
            ++pos;
            continue;
        }
        node = n.child(pos + 1);
        n = read(node);
        while (!n.is_leaf()) {
            node = n.child(0);
            n = read(node);
        }
        pos = 0;
    }
    return visited;
}

std::vector<BTree::Entry> BTree::scan(Key k, std::size_t len)
{
    std::vector<Entry> out;
    scan(k, len, [&](Key key, std::span<const std::byte> v) { out.push_back({key, {v.begin(), v.end()}}); });
    return out;
}

// ---------------------------------------------------------------------------
// insertion

void BTree::insert(Key k, std::span<const std::byte> value)
{
    if (value.size() != options_.value_size)
        throw UsageError("value size mismatch");
    if (!root_) {
        create_root(k, value);
        return;
    }
    if (auto split = insert_rec(root_, k, value))
        grow_root(std::move(*split));
}

std::optional<BTree::Split> BTree::insert_rec(Handle node, Key k, std::span<const std::byte> value)
{
    const ConstNode n = read(node);
    const std::size_t pos = n.lower_bound(k);
    if (pos < n.count() && n.key(pos) == k)
        return std::nullopt;

    if (n.is_leaf()) {
        ++size_;
        if (n.count() < options_.max_keys) {
            Node w = write(node);
            const std::size_t cnt = w.count();
            for (std::size_t i = cnt; i > pos; --i) {
                w.set_key(i, w.key(i - 1));
                w.set_value(i, w.value(i - 1));
            }
            w.set_key(pos, k);
            w.set_value(pos, value);
            w.set_count(cnt + 1);
            return std::nullopt;
        }
        return split_node(node, pos, k, value, null_handle);
    }

    auto below = insert_rec(n.child(pos), k, value);
    if (!below)
        return std::nullopt;

    // The child split: the separator goes to pos, the new node right of it.
    Node w = write(node);
    const std::size_t cnt = w.count();
    if (cnt < options_.max_keys) {
        for (std::size_t i = cnt; i > pos; --i) {
            w.set_key(i, w.key(i - 1));
            w.set_value(i, w.value(i - 1));
            w.set_child(i + 1, w.child(i));
        }
        w.set_key(pos, below->key);
        w.set_value(pos, below->value);
        w.set_child(pos + 1, below->baby);
        w.set_count(cnt + 1);
        return std::nullopt;
    }
    return split_node(node, pos, below->key, below->value, below->baby);
}

BTree::Split BTree::split_node(Handle node, std::size_t pos, Key k, std::span<const std::byte> value,
                               Handle right_child)
{
    const Handle fresh = place_split(node);
    right_child = remap(right_child);

    const std::size_t m = options_.max_keys;
    const std::size_t vs = options_.value_size;
    std::vector<Key> keys(m + 1);
    std::vector<std::byte> values((m + 1) * vs);
    std::vector<Handle> kids(m + 2);

    Node w = write(node);
    const bool leaf = w.is_leaf();
    for (std::size_t i = 0, j = 0; i <= m; ++i) {
        if (i == pos) {
            keys[i] = k;
            std::memcpy(values.data() + i * vs, value.data(), vs);
        } else {
            keys[i] = w.key(j);
            std::memcpy(values.data() + i * vs, w.value(j).data(), vs);
            ++j;
        }
    }
    if (!leaf) {
        for (std::size_t i = 0, j = 0; i <= m + 1; ++i)
            kids[i] = (i == pos + 1) ? right_child : w.child(j++);
    }

    const std::size_t left = (m + 1) / 2;
    const std::size_t right = m - left;
    auto value_at = [&](std::size_t i) { return std::span<const std::byte>(values.data() + i * vs, vs); };

    w.set_count(left);
    for (std::size_t i = 0; i < left; ++i) {
        w.set_key(i, keys[i]);
        w.set_value(i, value_at(i));
    }
    for (std::size_t i = 0; i <= m; ++i)
        w.set_child(i, (!leaf && i <= left) ? kids[i] : null_handle);
    const Handle parent = w.parent();

    Node f = write(fresh);
    f.set_count(right);
    f.set_parent(parent);
    for (std::size_t i = 0; i < right; ++i) {
        f.set_key(i, keys[left + 1 + i]);
        f.set_value(i, value_at(left + 1 + i));
    }
    if (!leaf) {
        for (std::size_t i = 0; i <= right; ++i) {
            f.set_child(i, kids[left + 1 + i]);
            write(kids[left + 1 + i]).set_parent(fresh);
        }
    }

    ++node_count_;
    link_after(node, fresh);
    const auto sep = value_at(left);
    return Split{fresh, keys[left], std::vector<std::byte>(sep.begin(), sep.end())};
}

void BTree::create_root(Key k, std::span<const std::byte> value)
{
    const Handle r = place_front(null_handle);
    Node w = write(r);
    w.set_count(1);
    w.set_key(0, k);
    w.set_value(0, value);
    root_ = head_ = tail_ = r;
    node_count_ = 1;
    size_ = 1;
}

void BTree::grow_root(Split split)
{
    const Handle r = place_front(root_);
    const Handle old = remap(root_);
    const Handle baby = remap(split.baby);

    Node w = write(r);
    w.set_count(1);
    w.set_key(0, split.key);
    w.set_value(0, split.value);
    w.set_child(0, old);
    w.set_child(1, baby);
    w.set_parent(null_handle);
    w.set_prev(null_handle);
    w.set_next(head_);
    write(head_).set_prev(r);
    head_ = r;
    write(old).set_parent(r);
    write(baby).set_parent(r);
    root_ = r;
    ++node_count_;
}

void BTree::link_after(Handle node, Handle fresh)
{
    Node n = write(node);
    const Handle after = n.next();
    Node f = write(fresh);
    f.set_prev(node);
    f.set_next(after);
    n.set_next(fresh);
    if (after)
        write(after).set_prev(fresh);
    else
        tail_ = fresh;
}

Handle BTree::remap(Handle h) const
{
    for (const auto& [from, to] : moved_)
        if (h == from)
            h = to;
    return h;
}

// ---------------------------------------------------------------------------
// placement

Handle BTree::allocate_in(SubAllocatorRef sub)
{
    return alloc_->allocate(sub, 1, layout_);
}

Handle BTree::place_front(Handle anchor)
{
    moved_.clear();
    switch (options_.variant) {
    case BTreeVariant::plain:
        return allocate_in(CollectiveAllocator::swappable_plain);
    case BTreeVariant::hint:
        return hint_->allocate(1, layout_, anchor);
    case BTreeVariant::dfs:
    case BTreeVariant::veb:
        if (anchor) {
            try {
                return allocate_in(alloc_->get_suballocator(anchor));
            } catch (const CapacityExhausted&) {
            }
        }
        return allocate_in(CollectiveAllocator::swappable_plain);
    case BTreeVariant::local:
    case BTreeVariant::local_dfs:
    case BTreeVariant::local_veb:
        // A new root heads the priority list, so it always asks for the
        // purely-local region first.
        return place_with_eviction(null_handle, CollectiveAllocator::purely_local);
    }
    throw UsageError("unknown variant");
}

Handle BTree::place_split(Handle node)
{
    moved_.clear();
    switch (options_.variant) {
    case BTreeVariant::plain:
        return allocate_in(CollectiveAllocator::swappable_plain);
    case BTreeVariant::hint: {
        const Handle parent = read(node).parent();
        return hint_->allocate(1, layout_, parent ? parent : node);
    }
    case BTreeVariant::local:
        return place_with_eviction(node, alloc_->get_suballocator(node));
    case BTreeVariant::local_dfs:
    case BTreeVariant::local_veb: {
        const Handle parent = read(node).parent();
        return place_with_eviction(node, alloc_->get_suballocator(parent ? parent : node));
    }
    case BTreeVariant::dfs:
    case BTreeVariant::veb: {
        const Handle parent = read(node).parent();
        try {
            return allocate_in(alloc_->get_suballocator(parent ? parent : node));
        } catch (const CapacityExhausted&) {
            return allocate_in(CollectiveAllocator::swappable_plain);
        }
    }
    }
    throw UsageError("unknown variant");
}

// `node` is the priority-list predecessor of the node being placed (null:
// the new node goes to the front). On purely-local exhaustion the
// least-priority resident node is evicted when it ranks below `node`.
Handle BTree::place_with_eviction(Handle node, SubAllocatorRef sub)
{
    try {
        const Handle h = allocate_in(sub);
        if (node == least_priority_ && sub == CollectiveAllocator::purely_local)
            least_priority_ = h;
        return h;
    } catch (const CapacityExhausted&) {
    }

    const bool node_local =
        !node || alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, node);
    if (sub == CollectiveAllocator::purely_local && node_local) {
        while (least_priority_ && least_priority_ != node) {
            const Handle victim = least_priority_;
            const Handle before = peek(victim).prev();
            relocate_to_swappable(victim);
            try {
                const Handle h = allocate_in(sub);
                least_priority_ = before == node ? h : before;
                return h;
            } catch (const CapacityExhausted&) {
            }
        }
    }
    return allocate_in(CollectiveAllocator::swappable_plain);
}

// ---------------------------------------------------------------------------
// relocation

Handle BTree::move_node(Handle from, Handle to)
{
    const auto src = space_->access(from, Access::read);
    const auto dst = space_->access(to, Access::write);
    std::memcpy(dst.data(), src.data(), node_bytes_);
    const ConstNode n(dst.data(), this);

    if (from == root_) {
        root_ = to;
    } else if (const Handle parent = n.parent()) {
        Node p = write(parent);
        const std::size_t i = p.index_of_child(from);
        // A freshly split node is not linked into its parent yet.
        if (i <= p.count())
            p.set_child(i, to);
    }
    if (!n.is_leaf())
        for (std::size_t i = 0; i <= n.count(); ++i)
            write(n.child(i)).set_parent(to);

    if (const Handle prev = n.prev())
        write(prev).set_next(to);
    else
        head_ = to;
    if (const Handle next = n.next())
        write(next).set_prev(to);
    else
        tail_ = to;
    if (least_priority_ == from)
        least_priority_ = to;

    moved_.emplace_back(from, to);
    free_node(from);
    return to;
}

void BTree::free_node(Handle h)
{
    if (alloc_)
        alloc_->deallocate(h, 1, layout_);
    else
        hint_->deallocate(h, 1, layout_);
}

Handle BTree::relocate_to_swappable(Handle node)
{
    if (!alloc_)
        throw UsageError("relocation to the swappable region needs a collective allocator");
    const Handle before = peek(node).prev();
    const bool was_least = node == least_priority_;
    const Handle fresh = move_node(node, allocate_in(CollectiveAllocator::swappable_plain));
    if (was_least) {
        least_priority_ = before && alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, before)
                              ? before
                              : null_handle;
    }
    return fresh;
}

Handle BTree::relocate_to_page(Handle node, SubAllocatorRef dest)
{
    if (!alloc_)
        throw UsageError("relocation to a page needs a collective allocator");
    if (dest.kind != Kind::new_per_page)
        throw UsageError("relocation destination must be a per-page sub-allocator");
    if (alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, node))
        throw UsageError("purely-local nodes are not relocated to pages");
    return move_node(node, allocate_in(dest));
}

// ---------------------------------------------------------------------------
// batch rearrangement

void BTree::make_page_aware()
{
    switch (options_.variant) {
    case BTreeVariant::dfs:
    case BTreeVariant::local_dfs:
        make_page_aware_dfs();
        break;
    case BTreeVariant::veb:
    case BTreeVariant::local_veb:
        make_page_aware_veb();
        break;
    case BTreeVariant::hint:
        make_page_aware_hint();
        break;
    case BTreeVariant::plain:
    case BTreeVariant::local:
        break;
    }
}

Handle BTree::page_step(Handle node, SubAllocatorRef& page)
{
    if (alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, node))
        return node;
    if (!alloc_->is_occupancy_under(page, page_fill_threshold)) {
        page = alloc_->get_suballocator(Kind::new_per_page);
        rearrangement_pages_.push_back(page);
    }
    return relocate_to_page(node, page);
}

void BTree::make_page_aware_dfs()
{
    if (!alloc_)
        throw UsageError("page-aware rearrangement needs a collective allocator");
    rearrangement_pages_.clear();
    if (!root_)
        return;
    SubAllocatorRef page = alloc_->get_suballocator(Kind::new_per_page);
    rearrangement_pages_.push_back(page);
    dfs_visit(root_, page);
}

Handle BTree::dfs_visit(Handle node, SubAllocatorRef& page)
{
    const ConstNode n = read(node);
    if (!n.is_leaf())
        for (std::size_t i = 0; i <= n.count(); ++i)
            dfs_visit(n.child(i), page);
    return page_step(node, page);
}

void BTree::make_page_aware_veb()
{
    if (!alloc_)
        throw UsageError("page-aware rearrangement needs a collective allocator");
    rearrangement_pages_.clear();
    if (!root_)
        return;
    SubAllocatorRef page = alloc_->get_suballocator(Kind::new_per_page);
    rearrangement_pages_.push_back(page);
    veb_visit(root_, height(), page);
}

Handle BTree::veb_visit(Handle node, std::size_t h, SubAllocatorRef& page)
{
    switch (h) {
    case 0:
        return node;
    case 1:
        return page_step(node, page);
    default: {
        const std::size_t lower = h / 2;
        const std::size_t upper = h - lower;
        node = veb_visit(node, upper, page);
        std::vector<Handle> below;
        descendants_at(node, upper, below);
        for (const Handle d : below)
            veb_visit(d, lower, page);
        return node;
    }
    }
}

void BTree::descendants_at(Handle node, std::size_t generations, std::vector<Handle>& out)
{
    if (generations == 0) {
        out.push_back(node);
        return;
    }
    const ConstNode n = read(node);
    if (n.is_leaf())
        return;
    for (std::size_t i = 0; i <= n.count(); ++i)
        descendants_at(n.child(i), generations - 1, out);
}

void BTree::make_page_aware_hint()
{
    if (!hint_)
        throw UsageError("hinted rearrangement needs a hint allocator");
    Handle previous = null_handle;
    if (root_)
        hint_visit(root_, previous);
}

Handle BTree::hint_visit(Handle node, Handle& previous)
{
    const ConstNode n = read(node);
    if (!n.is_leaf())
        for (std::size_t i = 0; i <= n.count(); ++i)
            hint_visit(n.child(i), previous);
    const Handle fresh = hint_->allocate(1, layout_, previous);
    move_node(node, fresh);
    previous = fresh;
    return fresh;
}

// ---------------------------------------------------------------------------
// inspection

std::size_t BTree::height() const
{
    std::size_t h = 0;
    for (Handle node = root_; node; ++h)
        node = peek(node).child(0);
    return h;
}

std::vector<Handle> BTree::priority_list() const
{
    std::vector<Handle> out;
    out.reserve(node_count_);
    for (Handle h = head_; h && out.size() <= node_count_; h = peek(h).next())
        out.push_back(h);
    return out;
}

Handle BTree::parent_of(Handle node) const
{
    return peek(node).parent();
}

std::vector<Handle> BTree::children_of(Handle node) const
{
    const ConstNode n = peek(node);
    std::vector<Handle> out;
    if (!n.is_leaf())
        for (std::size_t i = 0; i <= n.count(); ++i)
            out.push_back(n.child(i));
    return out;
}

std::vector<BTree::Key> BTree::keys_of(Handle node) const
{
    const ConstNode n = peek(node);
    std::vector<Key> out;
    for (std::size_t i = 0; i < n.count(); ++i)
        out.push_back(n.key(i));
    return out;
}

void BTree::for_each_node(const std::function<void(Handle, std::size_t)>& fn) const
{
    if (!root_)
        return;
    std::vector<std::pair<Handle, std::size_t>> stack{{root_, 0}};
    while (!stack.empty()) {
        const auto [h, depth] = stack.back();
        stack.pop_back();
        fn(h, depth);
        const ConstNode n = peek(h);
        if (!n.is_leaf())
            for (std::size_t i = n.count() + 1; i-- > 0;)
                stack.emplace_back(n.child(i), depth + 1);
    }
}

void BTree::for_each_edge(const std::function<void(Handle, Handle)>& fn) const
{
    for_each_node([&](Handle h, std::size_t) {
        for (const Handle c : children_of(h))
            fn(h, c);
    });
}

std::vector<BTree::Entry> BTree::entries() const
{
    std::vector<Entry> out;
    out.reserve(size_);
    const std::function<void(Handle)> walk = [&](Handle h) {
        const ConstNode n = peek(h);
        for (std::size_t i = 0; i < n.count(); ++i) {
            if (!n.is_leaf())
                walk(n.child(i));
            const auto v = n.value(i);
            out.push_back({n.key(i), {v.begin(), v.end()}});
        }
        if (!n.is_leaf())
            walk(n.child(n.count()));
    };
    if (root_)
        walk(root_);
    return out;
}

std::optional<std::string> BTree::validate() const
{
    if (!root_) {
        if (size_ != 0 || node_count_ != 0 || head_ || tail_)
            return "empty tree with stale bookkeeping";
        return std::nullopt;
    }

    const std::size_t min_keys = (order_ + 1) / 2 - 1;
    std::unordered_map<Handle, std::size_t> depth_of;
    std::size_t keys = 0;
    std::optional<std::size_t> leaf_depth;
    std::optional<std::string> error;

    const std::function<void(Handle, Handle, std::optional<Key>, std::optional<Key>, std::size_t)> check =
        [&](Handle h, Handle parent, std::optional<Key> lo, std::optional<Key> hi, std::size_t depth) {
            if (error)
                return;
            if (!space_->is_live(h)) {
                error = "dangling child handle";
                return;
            }
            if (space_->block_size(h) != node_bytes_) {
                error = "node block has the wrong size";
                return;
            }
            if (!depth_of.emplace(h, depth).second) {
                error = "node reachable twice";
                return;
            }
            const ConstNode n = peek(h);
            const std::size_t cnt = n.count();
            if (cnt == 0 || cnt > options_.max_keys || (h != root_ && cnt < min_keys)) {
                error = "node key count " + std::to_string(cnt) + " out of range";
                return;
            }
            if (n.parent() != parent) {
                error = "parent link mismatch";
                return;
            }
            for (std::size_t i = 0; i < cnt; ++i) {
                const Key k = n.key(i);
                if ((i > 0 && n.key(i - 1) >= k) || (lo && k <= *lo) || (hi && k >= *hi)) {
                    error = "key order violated";
                    return;
                }
            }
            keys += cnt;
            if (n.is_leaf()) {
                for (std::size_t i = 0; i <= options_.max_keys; ++i)
                    if (n.child(i)) {
                        error = "leaf with a child";
                        return;
                    }
                if (!leaf_depth)
                    leaf_depth = depth;
                else if (*leaf_depth != depth)
                    error = "leaves at different depths";
                return;
            }
            for (std::size_t i = 0; i <= cnt; ++i) {
                if (!n.child(i)) {
                    error = "internal node with a missing child";
                    return;
                }
                check(n.child(i), h, i == 0 ? lo : std::optional<Key>(n.key(i - 1)),
                      i == cnt ? hi : std::optional<Key>(n.key(i)), depth + 1);
            }
        };
    check(root_, null_handle, std::nullopt, std::nullopt, 0);
    if (error)
        return error;
    if (keys != size_)
        return "size counter disagrees with stored keys";
    if (depth_of.size() != node_count_)
        return "node counter disagrees with reachable nodes";

    // Priority list: every node once, depth non-decreasing, purely-local prefix.
    std::unordered_set<Handle> seen;
    Handle prev = null_handle;
    std::size_t last_depth = 0;
    bool swappable_seen = false;
    Handle last_local = null_handle;
    for (Handle h = head_; h; h = peek(h).next()) {
        const auto it = depth_of.find(h);
        if (it == depth_of.end() || !seen.insert(h).second)
            return "priority list holds a foreign or repeated node";
        const ConstNode n = peek(h);
        if (n.prev() != prev)
            return "priority list back link broken";
        if (it->second < last_depth)
            return "priority list not ordered by depth";
        last_depth = it->second;
        const bool local = space_->is_purely_local(h);
        if (local) {
            if (swappable_seen)
                return "purely-local nodes do not form a prefix of the priority list";
            last_local = h;
        } else {
            swappable_seen = true;
        }
        prev = h;
    }
    if (prev != tail_)
        return "priority list tail mismatch";
    if (seen.size() != node_count_)
        return "priority list misses nodes";
    if (last_local != least_priority_)
        return "least-priority marker is not the last purely-local node";
    if (!uses_purely_local(options_.variant) && last_local)
        return "variant without the purely-local region holds a purely-local node";
    return std::nullopt;
}

} // namespace farloc
