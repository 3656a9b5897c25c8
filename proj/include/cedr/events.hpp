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

#ifndef CEDR_EVENTS_HPP_
#define CEDR_EVENTS_HPP_

#include <optional>
#include <string>
#include <vector>

#include <cedr/payload.hpp>
#include <cedr/timestamp.hpp>

namespace cedr {

/**
 * @brief One row of a tritemporal history table.
 *
 * `lineage` groups an initial insert with all retractions of it. A retraction shrinks
 * the occurrence end; occurrence.start == occurrence.end removes the event entirely.
 * `rootTime` and `contributors` carry pattern lineage through an engine pipeline and
 * are empty for primitive events.
 */
struct TritemporalEvent {
    std::string lineage;
    std::string id;
    Interval valid{0, kInfinity};
    Interval occurrence{0, kInfinity};
    Interval arrival{0, kInfinity};
    Payload payload;
    std::optional<Timestamp> rootTime;
    std::vector<std::string> contributors;

    bool isRemoval() const { return occurrence.start == occurrence.end; }

    bool operator==(const TritemporalEvent&) const = default;
    std::strong_ordering operator<=>(const TritemporalEvent& o) const;
};

/// A set of tritemporal rows. Rows are kept sorted and de-duplicated, so two tables
/// holding the same rows compare equal regardless of insertion order.
class HistoryTable {
  public:
    HistoryTable() = default;
    HistoryTable(std::initializer_list<TritemporalEvent> rows);
    explicit HistoryTable(std::vector<TritemporalEvent> rows);

    const std::vector<TritemporalEvent>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

    void insert(TritemporalEvent row);

    bool operator==(const HistoryTable&) const = default;

  private:
    void normalize();
    std::vector<TritemporalEvent> rows_;
};

struct AnnotatedRow {
    Timestamp sync;
    TritemporalEvent event;

    bool operator==(const AnnotatedRow&) const = default;
};

using AnnotatedHistoryTable = std::vector<AnnotatedRow>;

/// Row of a unitemporal ideal history table.
struct UnitemporalEvent {
    std::string id;
    Interval valid;
    Payload payload;

    bool operator==(const UnitemporalEvent&) const = default;
    std::strong_ordering operator<=>(const UnitemporalEvent& o) const;
};

using UnitemporalTable = std::vector<UnitemporalEvent>;

/// Event header (ID, V_s, V_e, O_s, O_e, R_t, cbt[]) plus payload.
struct PatternEvent {
    std::string id;
    Interval valid;
    Interval occurrence;
    Timestamp rootTime;
    std::vector<std::string> contributors;
    Payload payload;

    bool operator==(const PatternEvent&) const = default;
    std::strong_ordering operator<=>(const PatternEvent& o) const;

    /// A primitive event: root time is its valid start, no contributors.
    static PatternEvent primitive(std::string id, Interval valid, Interval occurrence, Payload payload);
};

using PatternStream = std::vector<PatternEvent>;

/// (occurrence time, CEDR time) pair.
struct SyncPointPair {
    Timestamp occurrence;
    Timestamp cedr;

    auto operator<=>(const SyncPointPair&) const = default;
};

}// namespace cedr

#endif// CEDR_EVENTS_HPP_
