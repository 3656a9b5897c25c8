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

#include <cedr/error.hpp>
#include <cedr/events.hpp>

#include <algorithm>
#include <tuple>

namespace cedr {

const char* toString(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InfiniteInterval: return "InfiniteInterval";
        case ErrorKind::AmbiguousLineage: return "AmbiguousLineage";
        case ErrorKind::TypeMismatch: return "TypeMismatch";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::UnboundVariable: return "UnboundVariable";
        case ErrorKind::NonMonotoneGuarantee: return "NonMonotoneGuarantee";
        case ErrorKind::NotASyncPoint: return "NotASyncPoint";
        case ErrorKind::CompileError: return "CompileError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

namespace {
template<typename T>
std::strong_ordering compareVectors(const std::vector<T>& a, const std::vector<T>& b) {
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}
}// namespace

std::strong_ordering TritemporalEvent::operator<=>(const TritemporalEvent& o) const {
    if (auto c = lineage <=> o.lineage; c != 0) return c;
    if (auto c = arrival <=> o.arrival; c != 0) return c;
    if (auto c = occurrence <=> o.occurrence; c != 0) return c;
    if (auto c = valid <=> o.valid; c != 0) return c;
    if (auto c = id <=> o.id; c != 0) return c;
    if (auto c = payload <=> o.payload; c != 0) return c;
    if (auto c = rootTime <=> o.rootTime; c != 0) return c;
    return compareVectors(contributors, o.contributors);
}

HistoryTable::HistoryTable(std::initializer_list<TritemporalEvent> rows) : rows_(rows) { normalize(); }

HistoryTable::HistoryTable(std::vector<TritemporalEvent> rows) : rows_(std::move(rows)) { normalize(); }

void HistoryTable::insert(TritemporalEvent row) {
    auto it = std::lower_bound(rows_.begin(), rows_.end(), row);
    if (it == rows_.end() || *it != row) {
        rows_.insert(it, std::move(row));
    }
}

void HistoryTable::normalize() {
    std::sort(rows_.begin(), rows_.end());
    rows_.erase(std::unique(rows_.begin(), rows_.end()), rows_.end());
}

std::strong_ordering UnitemporalEvent::operator<=>(const UnitemporalEvent& o) const {
    if (auto c = valid <=> o.valid; c != 0) return c;
    if (auto c = payload <=> o.payload; c != 0) return c;
    return id <=> o.id;
}

std::strong_ordering PatternEvent::operator<=>(const PatternEvent& o) const {
    if (auto c = valid <=> o.valid; c != 0) return c;
    if (auto c = id <=> o.id; c != 0) return c;
    if (auto c = occurrence <=> o.occurrence; c != 0) return c;
    if (auto c = rootTime <=> o.rootTime; c != 0) return c;
    if (auto c = compareVectors(contributors, o.contributors); c != 0) return c;
    return payload <=> o.payload;
}

PatternEvent PatternEvent::primitive(std::string id, Interval valid, Interval occurrence, Payload payload) {
    return PatternEvent{std::move(id), valid, occurrence, valid.start, {}, std::move(payload)};
}

}// namespace cedr
