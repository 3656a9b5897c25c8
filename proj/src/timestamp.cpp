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

#include <cedr/timestamp.hpp>

#include <charconv>

namespace cedr {

std::string Timestamp::toString() const { return isInfinite() ? std::string("inf") : std::to_string(ticks_); }

std::optional<Timestamp> Timestamp::parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "INF") {
        return infinity();
    }
    Rep value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty() || value == kInf) {
        return std::nullopt;
    }
    return Timestamp(value);
}

std::ostream& operator<<(std::ostream& os, Timestamp t) { return os << t.toString(); }

std::ostream& operator<<(std::ostream& os, const Interval& i) { return os << '[' << i.start << ',' << i.end << ')'; }

}// namespace cedr
