#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace farloc {

enum class BTreeVariant { plain, hint, local, dfs, local_dfs, veb, local_veb };
enum class SkipListVariant { plain, hint, local, page, local_page };

constexpr bool uses_purely_local(BTreeVariant v) noexcept
{
    return v == BTreeVariant::local || v == BTreeVariant::local_dfs || v == BTreeVariant::local_veb;
}

constexpr bool uses_purely_local(SkipListVariant v) noexcept
{
    return v == SkipListVariant::local || v == SkipListVariant::local_page;
}

/// Whether the variant runs a batch rearrangement after the placement phase.
constexpr bool has_rearrangement(BTreeVariant v) noexcept
{
    return v != BTreeVariant::plain && v != BTreeVariant::local;
}

constexpr bool has_rearrangement(SkipListVariant v) noexcept
{
    return v == SkipListVariant::hint || v == SkipListVariant::page || v == SkipListVariant::local_page;
}

std::string_view to_string(BTreeVariant v) noexcept;
std::string_view to_string(SkipListVariant v) noexcept;

/// Accepts "local+dfs" and "local_dfs" spellings.
std::optional<BTreeVariant> parse_btree_variant(std::string_view name) noexcept;
std::optional<SkipListVariant> parse_skiplist_variant(std::string_view name) noexcept;

enum class Container { btree, skiplist };

/// A container together with its placement variant.
struct ContainerVariant {
    Container container = Container::btree;
    BTreeVariant btree = BTreeVariant::plain;
    SkipListVariant skiplist = SkipListVariant::plain;

    static constexpr ContainerVariant of(BTreeVariant v) noexcept { return {Container::btree, v, {}}; }
    static constexpr ContainerVariant of(SkipListVariant v) noexcept { return {Container::skiplist, {}, v}; }

    friend bool operator==(const ContainerVariant&, const ContainerVariant&) = default;
};

constexpr bool uses_purely_local(ContainerVariant v) noexcept
{
    return v.container == Container::btree ? uses_purely_local(v.btree) : uses_purely_local(v.skiplist);
}

constexpr bool has_rearrangement(ContainerVariant v) noexcept
{
    return v.container == Container::btree ? has_rearrangement(v.btree) : has_rearrangement(v.skiplist);
}

/// B-tree variants print bare ("local+dfs"), skip-list variants with a
/// "skiplist:" prefix ("skiplist:page").
std::string to_string(ContainerVariant v);
/// Bare names are B-tree variants; "btree:" and "skiplist:" prefixes select
/// the container explicitly.
std::optional<ContainerVariant> parse_variant(std::string_view name) noexcept;

} // namespace farloc
