#pragma once

#include <cstddef>

#include "dldo/error.hpp"

namespace dldo {

enum class Direction { Up, Down };

/// Register state of a PMOS bank: `count` contiguous ones from the LSB end of a
/// `width`-bit shift register. Only contiguous-ones states are representable.
class ThermometerCode {
public:
    constexpr explicit ThermometerCode(std::size_t width, std::size_t count = 0)
        : width_(width), count_(count) {
        if (width_ == 0) throw ModelError("ThermometerCode: width must be >= 1");
        if (count_ > width_) throw ModelError("ThermometerCode: count exceeds width");
    }

    [[nodiscard]] constexpr std::size_t count() const noexcept { return count_; }
    [[nodiscard]] constexpr std::size_t width() const noexcept { return width_; }
    [[nodiscard]] constexpr bool full() const noexcept { return count_ == width_; }
    [[nodiscard]] constexpr bool empty() const noexcept { return count_ == 0; }

    /// Bit `i` of the register (LSB = 0).
    [[nodiscard]] constexpr bool bit(std::size_t i) const noexcept { return i < count_; }

    // Right shift on a high comparator bit fills one more cell; left shift
    // on a low bit empties one. Both saturate.
    [[nodiscard]] constexpr ThermometerCode shifted(Direction dir) const noexcept {
        ThermometerCode next = *this;
        if (dir == Direction::Up) {
            if (next.count_ < next.width_) ++next.count_;
        } else if (next.count_ > 0) {
            --next.count_;
        }
        return next;
    }

    friend constexpr bool operator==(const ThermometerCode&, const ThermometerCode&) = default;

private:
    std::size_t width_;
    std::size_t count_;
};

[[nodiscard]] constexpr ThermometerCode ssbisr_step(const ThermometerCode& code, Direction dir) noexcept {
    return code.shifted(dir);
}

}  // namespace dldo
