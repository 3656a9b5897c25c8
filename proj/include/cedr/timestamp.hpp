/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#ifndef CEDR_TIMESTAMP_HPP_
#define CEDR_TIMESTAMP_HPP_

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

namespace cedr {

/**
 * @brief Logical tick count shared by valid, occurrence and CEDR time.
 *
 * INFINITY is a reserved sentinel that compares greater than every finite tick.
 * Addition saturates at INFINITY; subtraction from INFINITY stays INFINITY.
 */
class Timestamp {
  public:
    using Rep = std::uint64_t;

    constexpr Timestamp() = default;
    constexpr Timestamp(Rep ticks) : ticks_(ticks) {}// NOLINT(google-explicit-constructor)

    static constexpr Timestamp infinity() { return Timestamp(kInf); }
    static constexpr Timestamp zero() { return Timestamp(0); }

    constexpr bool isInfinite() const { return ticks_ == kInf; }
    constexpr bool isFinite() const { return ticks_ != kInf; }
    constexpr Rep ticks() const { return ticks_; }

    constexpr auto operator<=>(const Timestamp&) const = default;

    friend constexpr Timestamp operator+(Timestamp a, Timestamp b) {
        if (a.isInfinite() || b.isInfinite() || kInf - a.ticks_ <= b.ticks_) {
            return infinity();
        }
        return Timestamp(a.ticks_ + b.ticks_);
    }

    /// Saturating difference: INFINITY - finite = INFINITY, finite - larger = 0.
    friend constexpr Timestamp operator-(Timestamp a, Timestamp b) {
        if (a.isInfinite()) {
            return infinity();
        }
        if (b.isInfinite() || b.ticks_ >= a.ticks_) {
            return zero();
        }
        return Timestamp(a.ticks_ - b.ticks_);
    }

    Timestamp& operator+=(Timestamp o) { return *this = *this + o; }

    /// "inf" or the decimal tick count.
    std::string toString() const;
    /// Accepts a decimal tick count or "inf"/"infinity"; nullopt otherwise.
    static std::optional<Timestamp> parse(const std::string& text);

  private:
    static constexpr Rep kInf = std::numeric_limits<Rep>::max();
    Rep ticks_ = 0;
};

inline constexpr Timestamp kInfinity = Timestamp::infinity();

std::ostream& operator<<(std::ostream& os, Timestamp t);

/// Half-open interval [start, end).
struct Interval {
    Timestamp start;
    Timestamp end;

    constexpr bool empty() const { return !(start < end); }
    constexpr bool contains(Timestamp t) const { return start <= t && t < end; }
    constexpr bool intersects(const Interval& o) const { return start < o.end && o.start < end; }

    constexpr auto operator<=>(const Interval&) const = default;
};

/// Two intervals meet iff the first ends exactly where the second starts.
constexpr bool meets(const Interval& first, const Interval& second) { return first.end == second.start; }

std::ostream& operator<<(std::ostream& os, const Interval& i);

}// namespace cedr

#endif// CEDR_TIMESTAMP_HPP_
