#include "farloc/variant.hpp"

#include <array>
#include <utility>

namespace farloc {

namespace {

constexpr std::array<std::pair<BTreeVariant, std::string_view>, 7> btree_names{{
    {BTreeVariant::plain, "plain"},
    {BTreeVariant::hint, "hint"},
    {BTreeVariant::local, "local"},
    {BTreeVariant::dfs, "dfs"},
    {BTreeVariant::local_dfs, "local+dfs"},
    {BTreeVariant::veb, "veb"},
    {BTreeVariant::local_veb, "local+veb"},
}};

constexpr std::array<std::pair<SkipListVariant, std::string_view>, 5> skiplist_names{{
    {SkipListVariant::plain, "plain"},
    {SkipListVariant::hint, "hint"},
    {SkipListVariant::local, "local"},
    {SkipListVariant::page, "page"},
    {SkipListVariant::local_page, "local+page"},
}};

bool same_name(std::string_view canonical, std::string_view name)
{
    if (canonical.size() != name.size())
        return false;
    for (std::size_t i = 0; i < name.size(); ++i) {
        char c = name[i];
        if (c == '_')
            c = '+';
        if (c >= 'A' && c <= 'Z')
            c = static_cast<char>(c - 'A' + 'a');
        if (c != canonical[i])
            return false;
    }
    return true;
}

} // namespace

std::string_view to_string(BTreeVariant v) noexcept
{
    for (const auto& [variant, name] : btree_names)
        if (variant == v)
            return name;
    return "?";
}

std::string_view to_string(SkipListVariant v) noexcept
{
    for (const auto& [variant, name] : skiplist_names)
        if (variant == v)
            return name;
    return "?";
}

std::optional<BTreeVariant> parse_btree_variant(std::string_view name) noexcept
{
    for (const auto& [variant, canonical] : btree_names)
        if (same_name(canonical, name))
            return variant;
    return std::nullopt;
}

std::optional<SkipListVariant> parse_skiplist_variant(std::string_view name) noexcept
{
    for (const auto& [variant, canonical] : skiplist_names)
        if (same_name(canonical, name))
            return variant;
    return std::nullopt;
}

std::string to_string(ContainerVariant v)
{
    if (v.container == Container::btree)
        return std::string(to_string(v.btree));
    return "skiplist:" + std::string(to_string(v.skiplist));
}

std::optional<ContainerVariant> parse_variant(std::string_view name) noexcept
{
    constexpr std::string_view btree_prefix = "btree:";
    constexpr std::string_view skiplist_prefix = "skiplist:";
    if (name.starts_with(skiplist_prefix)) {
        if (const auto v = parse_skiplist_variant(name.substr(skiplist_prefix.size())))
            return ContainerVariant::of(*v);
        return std::nullopt;
    }
    if (name.starts_with(btree_prefix))
        name.remove_prefix(btree_prefix.size());
    if (const auto v = parse_btree_variant(name))
        return ContainerVariant::of(*v);
    return std::nullopt;
}

} // namespace farloc
