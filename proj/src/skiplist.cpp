#include "farloc/skiplist.hpp"

#include "farloc/error.hpp"

#include <algorithm>
#include <cstring>
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

constexpr std::size_t off_key = 0;
constexpr std::size_t off_level = 8;
constexpr std::size_t off_prev = 16;
constexpr std::size_t off_next = 24;
constexpr std::size_t header_bytes = 32;

double u01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

class SkipList::ConstNode {
public:
    ConstNode(const std::byte* p, const SkipList* list) : p_(p), l_(list) {}

    Key key() const { return load<std::uint64_t>(p_ + off_key); }
    std::size_t level() const { return load<std::uint32_t>(p_ + off_level); }
    Handle prev() const { return {load<std::uint64_t>(p_ + off_prev)}; }
    Handle next() const { return {load<std::uint64_t>(p_ + off_next)}; }
    std::span<const std::byte> value() const { return {p_ + l_->off_value_, l_->options_.value_size}; }
    Handle forward(std::size_t i) const { return {load<std::uint64_t>(p_ + l_->off_forwards_ + 8 * i)}; }
    const std::byte* bytes() const { return p_; }

protected:
    const std::byte* p_;
    const SkipList* l_;
};

class SkipList::Node : public ConstNode {
public:
    Node(std::byte* p, const SkipList* list) : ConstNode(p, list), w_(p) {}

    void set_key(Key k) { store(w_ + off_key, k); }
    void set_level(std::size_t n) { store(w_ + off_level, static_cast<std::uint32_t>(n)); }
    void set_prev(Handle h) { store(w_ + off_prev, h.raw); }
    void set_next(Handle h) { store(w_ + off_next, h.raw); }
    void set_value(std::span<const std::byte> v) { std::memcpy(w_ + l_->off_value_, v.data(), v.size()); }
    void set_forward(std::size_t i, Handle h) { store(w_ + l_->off_forwards_ + 8 * i, h.raw); }

private:
    std::byte* w_;
};

SkipList::SkipList(CollectiveAllocator& alloc, SkipListOptions options)
    : SkipList(alloc.space(), &alloc, nullptr, options)
{
    if (options.variant == SkipListVariant::hint)
        throw ConfigError("the hint skip list runs on a HintAllocator");
}

SkipList::SkipList(HintAllocator& alloc, SkipListOptions options) : SkipList(alloc.space(), nullptr, &alloc, options)
{
    if (options.variant != SkipListVariant::hint)
        throw ConfigError("only the hint skip list runs on a HintAllocator");
}

SkipList::SkipList(Space& space, CollectiveAllocator* alloc, HintAllocator* hint, SkipListOptions options)
    : space_(&space), alloc_(alloc), hint_(hint), options_(options), rng_(options.seed)
{
    if (options_.max_level < 1 || options_.max_level > 64)
        throw ConfigError("max_level must be in 1..64");
    if (!(options_.p > 0.0 && options_.p < 1.0))
        throw ConfigError("level probability must be in (0, 1)");
    if (options_.value_size == 0)
        throw ConfigError("value size must be positive");
    off_value_ = header_bytes;
    off_forwards_ = align_up(off_value_ + options_.value_size, 8);
    if (node_bytes(options_.max_level) > space.page_size())
        throw ConfigError("the tallest skip-list node does not fit in a page");
    head_.assign(options_.max_level, null_handle);
    group_tail_.assign(options_.max_level + 1, null_handle);
}

std::size_t SkipList::node_bytes(std::size_t level) const
{
    return align_up(off_forwards_ + 8 * level, Space::granule);
}

ObjectLayout SkipList::layout(std::size_t level) const
{
    return {node_bytes(level), 8};
}

SkipList::Node SkipList::write(Handle h)
{
    return Node(space_->access(h, Access::write).data(), this);
}

SkipList::ConstNode SkipList::read(Handle h)
{
    return ConstNode(space_->access(h, Access::read).data(), this);
}

SkipList::ConstNode SkipList::peek(Handle h) const
{
    return ConstNode(space_->peek(h).data(), this);
}

std::size_t SkipList::random_level()
{
    std::size_t level = 1;
    while (level < options_.max_level && u01(rng_) < options_.p)
        ++level;
    return level;
}

Handle SkipList::forward(Handle from, std::size_t i)
{
    return from ? read(from).forward(i) : head_[i];
}

void SkipList::set_forward(Handle from, std::size_t i, Handle to)
{
    if (from)
        write(from).set_forward(i, to);
    else
        head_[i] = to;
}

std::pair<Handle, const std::byte*> SkipList::seek(Key k, std::vector<Handle>* preds)
{
    if (preds)
        preds->assign(options_.max_level, null_handle);
    Handle x = null_handle;
    const std::byte* xb = nullptr;
    Handle succ = null_handle;
    const std::byte* sb = nullptr;
    for (std::size_t i = level_; i-- > 0;) {
        succ = null_handle;
        sb = nullptr;
        for (;;) {
            const Handle nx = xb ? ConstNode(xb, this).forward(i) : head_[i];
            if (!nx)
                break;
            const ConstNode c = read(nx);
            if (c.key() >= k) {
                succ = nx;
                sb = c.bytes();
                break;
            }
            x = nx;
            xb = c.bytes();
        }
        if (preds)
            (*preds)[i] = x;
    }
    return {succ, sb};
}

// ---------------------------------------------------------------------------
// queries

std::optional<std::vector<std::byte>> SkipList::search(Key k)
{
    const auto [succ, bytes] = seek(k, nullptr);
    if (!succ)
        return std::nullopt;
    const ConstNode n(bytes, this);
    if (n.key() != k)
        return std::nullopt;
    const auto v = n.value();
    return std::vector<std::byte>(v.begin(), v.end());
}

bool SkipList::update(Key k, std::span<const std::byte> value)
{
    if (value.size() != options_.value_size)
        throw UsageError("value size mismatch");
    const auto [succ, bytes] = seek(k, nullptr);
    if (!succ || ConstNode(bytes, this).key() != k)
        return false;
    write(succ).set_value(value);
    return true;
}

std::size_t SkipList::scan(Key k, std::size_t len, const Visitor& visit)
{
    if (len == 0)
        return 0;
    auto [node, bytes] = seek(k, nullptr);
    std::size_t visited = 0;
    while (node) {
        const ConstNode n(bytes, this);
        visit(n.key(), n.value());
        if (++visited == len)
            break;
        node = n.forward(0);
        if (node)
            bytes = read(node).bytes();
    }
    return visited;
}

std::vector<SkipList::Entry> SkipList::scan(Key k, std::size_t len)
{
    std::vector<Entry> out;
    scan(k, len, [&](Key key, std::span<const std::byte> v) { out.push_back({key, {v.begin(), v.end()}}); });
    return out;
}

// ---------------------------------------------------------------------------
// insertion and placement

void SkipList::insert(Key k, std::span<const std::byte> value)
{
    if (value.size() != options_.value_size)
        throw UsageError("value size mismatch");
    std::vector<Handle> preds;
    const auto [succ, bytes] = seek(k, &preds);
    if (succ && ConstNode(bytes, this).key() == k)
        return;

    const std::size_t level = random_level();
    moved_.clear();
    const Handle h = place(level, priority_predecessor(level), preds[0]);
    for (Handle& p : preds)
        p = remap(p);

    Node w = write(h);
    w.set_key(k);
    w.set_level(level);
    w.set_value(value);
    for (std::size_t i = 0; i < level; ++i) {
        w.set_forward(i, forward(preds[i], i));
        set_forward(preds[i], i, h);
    }
    link_priority_after(priority_predecessor(level), h, level);
    level_ = std::max(level_, level);
    ++size_;
}

Handle SkipList::priority_predecessor(std::size_t level) const
{
    for (std::size_t l = level; l <= options_.max_level; ++l)
        if (group_tail_[l])
            return group_tail_[l];
    return null_handle;
}

Handle SkipList::allocate_in(SubAllocatorRef sub, std::size_t level)
{
    return alloc_->allocate(sub, 1, layout(level));
}

Handle SkipList::place(std::size_t level, Handle priority_pred, Handle key_pred)
{
    switch (options_.variant) {
    case SkipListVariant::plain:
        return allocate_in(CollectiveAllocator::swappable_plain, level);
    case SkipListVariant::hint:
        return hint_->allocate(1, layout(level), key_pred);
    case SkipListVariant::page:
        if (priority_pred) {
            try {
                return allocate_in(alloc_->get_suballocator(priority_pred), level);
            } catch (const CapacityExhausted&) {
            }
        }
        return allocate_in(CollectiveAllocator::swappable_plain, level);
    case SkipListVariant::local:
    case SkipListVariant::local_page:
        return place_with_eviction(priority_pred,
                                   priority_pred ? alloc_->get_suballocator(priority_pred)
                                                 : CollectiveAllocator::purely_local,
                                   level);
    }
    throw UsageError("unknown variant");
}

// Same policy as the B-tree: `node` is the priority-list predecessor of the
// new node (null: it goes to the front).
Handle SkipList::place_with_eviction(Handle node, SubAllocatorRef sub, std::size_t level)
{
    try {
        const Handle h = allocate_in(sub, level);
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
                const Handle h = allocate_in(sub, level);
                least_priority_ = before == node ? h : before;
                return h;
            } catch (const CapacityExhausted&) {
            }
        }
    }
    return allocate_in(CollectiveAllocator::swappable_plain, level);
}

void SkipList::link_priority_after(Handle pred, Handle fresh, std::size_t level)
{
    Handle after;
    if (pred) {
        Node p = write(pred);
        after = p.next();
        p.set_next(fresh);
    } else {
        after = plist_head_;
        plist_head_ = fresh;
    }
    Node f = write(fresh);
    f.set_prev(pred);
    f.set_next(after);
    if (after)
        write(after).set_prev(fresh);
    else
        plist_tail_ = fresh;
    group_tail_[level] = fresh;
}

Handle SkipList::remap(Handle h) const
{
    for (const auto& [from, to] : moved_)
        if (h == from)
            h = to;
    return h;
}

// ---------------------------------------------------------------------------
// relocation

Handle SkipList::move_node(Handle from, Handle to, std::span<const Handle> preds)
{
    const auto src = space_->access(from, Access::read);
    const auto dst = space_->access(to, Access::write);
    const ConstNode n(dst.data(), this);
    std::memcpy(dst.data(), src.data(), node_bytes(ConstNode(src.data(), this).level()));
    const std::size_t level = n.level();

    for (std::size_t i = 0; i < level; ++i)
        set_forward(preds[i], i, to);

    if (const Handle prev = n.prev())
        write(prev).set_next(to);
    else
        plist_head_ = to;
    if (const Handle next = n.next())
        write(next).set_prev(to);
    else
        plist_tail_ = to;
    if (group_tail_[level] == from)
        group_tail_[level] = to;
    if (least_priority_ == from)
        least_priority_ = to;

    moved_.emplace_back(from, to);
    free_node(from, level);
    return to;
}

void SkipList::free_node(Handle h, std::size_t level)
{
    if (alloc_)
        alloc_->deallocate(h, 1, layout(level));
    else
        hint_->deallocate(h, 1, layout(level));
}

Handle SkipList::relocate_to_swappable(Handle node)
{
    if (!alloc_)
        throw UsageError("relocation to the swappable region needs a collective allocator");
    const ConstNode n = peek(node);
    const Handle before = n.prev();
    const bool was_least = node == least_priority_;
    std::vector<Handle> preds;
    seek(n.key(), &preds);
    const Handle fresh = move_node(node, allocate_in(CollectiveAllocator::swappable_plain, n.level()), preds);
    if (was_least) {
        least_priority_ = before && alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, before)
                              ? before
                              : null_handle;
    }
    return fresh;
}

Handle SkipList::relocate_to_page(Handle node, SubAllocatorRef dest)
{
    if (!alloc_)
        throw UsageError("relocation to a page needs a collective allocator");
    if (dest.kind != Kind::new_per_page)
        throw UsageError("relocation destination must be a per-page sub-allocator");
    if (alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, node))
        throw UsageError("purely-local nodes are not relocated to pages");
    const ConstNode n = peek(node);
    std::vector<Handle> preds;
    seek(n.key(), &preds);
    return move_node(node, allocate_in(dest, n.level()), preds);
}

// ---------------------------------------------------------------------------
// batch rearrangement

void SkipList::make_page_aware()
{
    switch (options_.variant) {
    case SkipListVariant::page:
    case SkipListVariant::local_page:
        make_page_aware_page();
        break;
    case SkipListVariant::hint:
        make_page_aware_hint();
        break;
    case SkipListVariant::plain:
    case SkipListVariant::local:
        break;
    }
}

// Visits nodes in key order. dest(node, level) returns the block the node
// moves to, or the node itself to leave it in place. last[i] tracks the
// latest node of level > i, whose forward i points at the current node.
template <class Destination>
void SkipList::sweep(Destination&& dest)
{
    std::vector<Handle> last(options_.max_level, null_handle);
    for (Handle x = head_[0]; x;) {
        const ConstNode n = read(x);
        const Handle next = n.forward(0);
        const std::size_t level = n.level();
        Handle placed = dest(x, level);
        if (placed != x) {
            moved_.clear();
            move_node(x, placed, std::span<const Handle>(last.data(), level));
        }
        for (std::size_t i = 0; i < level; ++i)
            last[i] = placed;
        x = next;
    }
}

void SkipList::make_page_aware_page()
{
    if (!alloc_)
        throw UsageError("page-aware rearrangement needs a collective allocator");
    rearrangement_pages_.clear();
    if (size_ == 0)
        return;
    SubAllocatorRef page = alloc_->get_suballocator(Kind::new_per_page);
    rearrangement_pages_.push_back(page);
    sweep([&](Handle x, std::size_t level) {
        if (alloc_->if_suballocator_contains(CollectiveAllocator::purely_local, x))
            return x;
        if (!alloc_->is_occupancy_under(page, page_fill_threshold)) {
            page = alloc_->get_suballocator(Kind::new_per_page);
            rearrangement_pages_.push_back(page);
        }
        return allocate_in(page, level);
    });
}

void SkipList::make_page_aware_hint()
{
    if (!hint_)
        throw UsageError("hinted rearrangement needs a hint allocator");
    Handle previous = null_handle;
    sweep([&](Handle, std::size_t level) {
        previous = hint_->allocate(1, layout(level), previous);
        return previous;
    });
}

// ---------------------------------------------------------------------------
// inspection

std::size_t SkipList::level_of(Handle node) const
{
    return peek(node).level();
}

SkipList::Key SkipList::key_of(Handle node) const
{
    return peek(node).key();
}

std::vector<Handle> SkipList::forwards_of(Handle node) const
{
    const ConstNode n = peek(node);
    std::vector<Handle> out(n.level());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = n.forward(i);
    return out;
}

std::vector<Handle> SkipList::priority_list() const
{
    std::vector<Handle> out;
    for (Handle h = plist_head_; h && out.size() <= size_; h = peek(h).next())
        out.push_back(h);
    return out;
}

void SkipList::for_each_node(const std::function<void(Handle)>& fn) const
{
    for (Handle h = head_[0]; h; h = peek(h).forward(0))
        fn(h);
}

void SkipList::for_each_edge(const std::function<void(Handle, Handle)>& fn) const
{
    for_each_node([&](Handle h) {
        const ConstNode n = peek(h);
        for (std::size_t i = 0; i < n.level(); ++i)
            if (const Handle f = n.forward(i))
                fn(h, f);
    });
}

std::vector<SkipList::Entry> SkipList::entries() const
{
    std::vector<Entry> out;
    out.reserve(size_);
    for_each_node([&](Handle h) {
        const ConstNode n = peek(h);
        const auto v = n.value();
        out.push_back({n.key(), {v.begin(), v.end()}});
    });
    return out;
}

std::optional<std::string> SkipList::validate() const
{
    std::vector<Handle> last(options_.max_level, null_handle);
    auto forward_of = [&](Handle from, std::size_t i) { return from ? peek(from).forward(i) : head_[i]; };

    std::unordered_set<Handle> nodes;
    std::size_t count = 0;
    std::size_t top = 0;
    std::optional<Key> prev_key;
    for (Handle h = head_[0]; h; h = peek(h).forward(0)) {
        if (!space_->is_live(h))
            return "dangling forward handle";
        if (++count > size_)
            return "level-0 chain longer than size";
        const ConstNode n = peek(h);
        const std::size_t level = n.level();
        if (level < 1 || level > options_.max_level)
            return "node level out of range";
        if (space_->block_size(h) != node_bytes(level))
            return "node block has the wrong size";
        if (prev_key && *prev_key >= n.key())
            return "level-0 chain not strictly ascending";
        prev_key = n.key();
        for (std::size_t i = 0; i < level; ++i) {
            if (forward_of(last[i], i) != h)
                return "forward at level " + std::to_string(i) + " skips a node";
            last[i] = h;
        }
        top = std::max(top, level);
        nodes.insert(h);
    }
    if (count != size_)
        return "size counter disagrees with the level-0 chain";
    for (std::size_t i = 0; i < options_.max_level; ++i)
        if (forward_of(last[i], i))
            return "forward chain at level " + std::to_string(i) + " does not end";
    if (top != level_)
        return "level counter disagrees with the tallest node";

    std::unordered_set<Handle> seen;
    std::vector<Handle> expect_tail(options_.max_level + 1, null_handle);
    Handle prev = null_handle;
    std::size_t last_level = options_.max_level;
    bool swappable_seen = false;
    Handle last_local = null_handle;
    for (Handle h = plist_head_; h; h = peek(h).next()) {
        if (!nodes.contains(h) || !seen.insert(h).second)
            return "priority list holds a foreign or repeated node";
        const ConstNode n = peek(h);
        if (n.prev() != prev)
            return "priority list back link broken";
        if (n.level() > last_level)
            return "priority list not ordered by level";
        last_level = n.level();
        expect_tail[n.level()] = h;
        if (space_->is_purely_local(h)) {
            if (swappable_seen)
                return "purely-local nodes do not form a prefix of the priority list";
            last_local = h;
        } else {
            swappable_seen = true;
        }
        prev = h;
    }
    if (prev != plist_tail_)
        return "priority list tail mismatch";
    if (seen.size() != size_)
        return "priority list misses nodes";
    if (expect_tail != group_tail_)
        return "level group tails are stale";
    if (last_local != least_priority_)
        return "least-priority marker is not the last purely-local node";
    if (!uses_purely_local(options_.variant) && last_local)
        return "variant without the purely-local region holds a purely-local node";
    return std::nullopt;
}

} // namespace farloc
