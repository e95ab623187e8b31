#pragma once

#include "farloc/btree.hpp"
#include "farloc/skiplist.hpp"
#include "farloc/space.hpp"

#include <cstddef>
#include <vector>

namespace farloc {

enum class LinkClass { purely_local, in_page, cross_page };

struct LinkComposition {
    std::size_t purely_local = 0;
    std::size_t in_page = 0;
    std::size_t cross_page = 0;

    std::size_t total() const noexcept { return purely_local + in_page + cross_page; }
    double purely_local_ratio() const noexcept { return ratio(purely_local); }
    double in_page_ratio() const noexcept { return ratio(in_page); }
    double cross_page_ratio() const noexcept { return ratio(cross_page); }

    void add(LinkClass c) noexcept;

    friend bool operator==(const LinkComposition&, const LinkComposition&) = default;

private:
    double ratio(std::size_t n) const noexcept
    {
        return total() == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(total());
    }
};

/// Both ends purely-local, both on one page, or anything else.
LinkClass classify_link(const Space& space, Handle a, Handle b);

/// Classifies every parent -> child edge. Throws UsageError when the tree
/// has no links (fewer than two nodes).
LinkComposition link_composition(const BTree& tree);
/// Classifies every forward edge at every level; the head tower is not a
/// node and contributes none. Throws UsageError when there are no links.
LinkComposition link_composition(const SkipList& list);
/// Element i covers the forward edges of level i only.
std::vector<LinkComposition> link_composition_by_level(const SkipList& list);

/// Fraction of non-root nodes not on their parent's page. A pair that is
/// purely-local on both ends counts as collocated. Throws UsageError for
/// fewer than two nodes.
double parent_page_mismatch_fraction(const BTree& tree);

} // namespace farloc
