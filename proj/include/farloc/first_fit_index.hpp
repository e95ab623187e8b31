#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace farloc::detail {

/// Max-segment tree over a growing sequence of slots. Answers "first slot
/// whose value is at least n" in O(log n); used to run first-fit across
/// pages in creation order without scanning every page.
class FirstFitIndex {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t size() const noexcept { return size_; }

    /// Resets to n zero-valued slots.
    void assign(std::size_t n)
    {
        leaves_ = 16;
        while (leaves_ < n)
            leaves_ *= 2;
        tree_.assign(2 * leaves_, 0);
        size_ = n;
    }

    std::size_t push_back(std::size_t value)
    {
        if (size_ == leaves_) {
            const std::size_t old_leaves = leaves_;
            leaves_ = leaves_ == 0 ? 16 : leaves_ * 2;
            std::vector<std::size_t> grown(2 * leaves_, 0);
            for (std::size_t i = 0; i < old_leaves; ++i)
                grown[leaves_ + i] = tree_[old_leaves + i];
            tree_ = std::move(grown);
            for (std::size_t i = leaves_ - 1; i > 0; --i)
                tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
        }
        const std::size_t slot = size_++;
        set(slot, value);
        return slot;
    }

    void set(std::size_t slot, std::size_t value)
    {
        std::size_t i = leaves_ + slot;
        tree_[i] = value;
        for (i /= 2; i > 0; i /= 2)
            tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
    }

    std::size_t get(std::size_t slot) const { return tree_[leaves_ + slot]; }

    /// First slot at or after `from` whose value is >= at_least, or npos.
    std::size_t find_first(std::size_t at_least, std::size_t from = 0) const
    {
        if (size_ == 0 || from >= size_)
            return npos;
        return descend(1, 0, leaves_, from, at_least);
    }

private:
    std::size_t descend(std::size_t node, std::size_t lo, std::size_t hi, std::size_t from,
                        std::size_t at_least) const
    {
        if (hi <= from || tree_[node] < at_least)
            return npos;
        if (node >= leaves_)
            return lo;
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t left = descend(2 * node, lo, mid, from, at_least);
        return left != npos ? left : descend(2 * node + 1, mid, hi, from, at_least);
    }

    std::vector<std::size_t> tree_;
    std::size_t leaves_ = 0;
    std::size_t size_ = 0;
};

} // namespace farloc::detail
