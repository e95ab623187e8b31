#include "farloc/metrics.hpp"

#include "farloc/error.hpp"

namespace farloc {

void LinkComposition::add(LinkClass c) noexcept
{
    switch (c) {
    case LinkClass::purely_local:
        ++purely_local;
        break;
    case LinkClass::in_page:
        ++in_page;
        break;
    case LinkClass::cross_page:
        ++cross_page;
        break;
    }
}

LinkClass classify_link(const Space& space, Handle a, Handle b)
{
    if (!space.is_live(a) || !space.is_live(b))
        throw UsageError("link endpoint is not a live block");
    const auto pa = space.page_of(a);
    const auto pb = space.page_of(b);
    if (!pa && !pb)
        return LinkClass::purely_local;
    if (pa && pb && *pa == *pb)
        return LinkClass::in_page;
    return LinkClass::cross_page;
}

LinkComposition link_composition(const BTree& tree)
{
    LinkComposition out;
    tree.for_each_edge([&](Handle parent, Handle child) { out.add(classify_link(tree.space(), parent, child)); });
    if (out.total() == 0)
        throw UsageError("link composition of a container without links");
    return out;
}

LinkComposition link_composition(const SkipList& list)
{
    LinkComposition out;
    list.for_each_edge([&](Handle from, Handle to) { out.add(classify_link(list.space(), from, to)); });
    if (out.total() == 0)
        throw UsageError("link composition of a container without links");
    return out;
}

std::vector<LinkComposition> link_composition_by_level(const SkipList& list)
{
    std::vector<LinkComposition> out(list.level());
    list.for_each_node([&](Handle h) {
        const auto fwd = list.forwards_of(h);
        for (std::size_t i = 0; i < fwd.size(); ++i)
            if (fwd[i])
                out[i].add(classify_link(list.space(), h, fwd[i]));
    });
    return out;
}

double parent_page_mismatch_fraction(const BTree& tree)
{
    if (tree.node_count() < 2)
        throw UsageError("parent/page mismatch needs at least two nodes");
    std::size_t edges = 0;
    std::size_t mismatched = 0;
    tree.for_each_edge([&](Handle parent, Handle child) {
        ++edges;
        if (classify_link(tree.space(), parent, child) == LinkClass::cross_page)
            ++mismatched;
    });
    return static_cast<double>(mismatched) / static_cast<double>(edges);
}

} // namespace farloc
