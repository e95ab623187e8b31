#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace farloc {

/// Opaque address of a block inside a simulated space. Raw value 0 is null.
struct Handle {
    std::uint64_t raw = 0;

    constexpr bool is_null() const noexcept { return raw == 0; }
    constexpr explicit operator bool() const noexcept { return raw != 0; }
    friend constexpr auto operator<=>(Handle, Handle) = default;
};

inline constexpr Handle null_handle{};

/// Index of one page in the swappable region.
struct PageId {
    std::uint64_t index = 0;

    friend constexpr auto operator<=>(PageId, PageId) = default;
};

inline constexpr std::size_t align_up(std::size_t value, std::size_t align) noexcept
{
    return (value + align - 1) & ~(align - 1);
}

inline constexpr bool is_power_of_two(std::size_t value) noexcept
{
    return value != 0 && (value & (value - 1)) == 0;
}

} // namespace farloc

template <>
struct std::hash<farloc::Handle> {
    std::size_t operator()(farloc::Handle h) const noexcept { return std::hash<std::uint64_t>{}(h.raw); }
};

template <>
struct std::hash<farloc::PageId> {
    std::size_t operator()(farloc::PageId p) const noexcept { return std::hash<std::uint64_t>{}(p.index); }
};
