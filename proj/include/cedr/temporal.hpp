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

#ifndef CEDR_TEMPORAL_HPP_
#define CEDR_TEMPORAL_HPP_

#include <vector>

#include <cedr/events.hpp>

namespace cedr {

enum class CanonicalMode { To, At };

/**
 * Reduction: for each lineage key only the row with the earliest occurrence end
 * survives. Equal occurrence ends keep the latest arrival.
 */
HistoryTable reduce(const HistoryTable& table);

/**
 * Truncation at t0: occurrence ends beyond t0 are clamped to t0, rows starting after
 * t0 are removed, and rows left with an empty occurrence interval are removed.
 * t0 = INFINITY only drops removal rows.
 */
HistoryTable truncate(const HistoryTable& table, Timestamp t0);

/// truncate(reduce(table), t0)
HistoryTable canonicalTo(const HistoryTable& table, Timestamp t0);

/// Rows of reduce(table) with o_s <= t0 <= o_e, then truncated at t0.
HistoryTable canonicalAt(const HistoryTable& table, Timestamp t0);

/// Replaces every row by unit-length occurrence slices covering its interval.
/// Throws Error(InfiniteInterval) for rows with an unbounded occurrence end.
std::vector<TritemporalEvent> shred(const std::vector<TritemporalEvent>& rows);

/**
 * Adds the Sync column: the earliest-arriving row of a lineage is its insertion
 * (Sync = occurrence start); every later row is a retraction (Sync = occurrence end).
 * Throws Error(AmbiguousLineage) when two rows of one lineage share the earliest arrival.
 */
AnnotatedHistoryTable annotateSync(const HistoryTable& table);

/// Every row must lie on one side of the point in both time domains.
bool isSyncPoint(const AnnotatedHistoryTable& table, SyncPointPair point);

/// Canonical tables compared after projecting away CEDR time and lineage keys.
bool logicallyEquivalent(const HistoryTable& a, const HistoryTable& b, Timestamp t0, CanonicalMode mode);

/// The projection used by logicallyEquivalent, exposed for diagnostics and tests.
std::vector<TritemporalEvent> logicalProjection(const HistoryTable& canonical);

/// Fixpoint of coalescing: per payload, the maximal intervals of the union of its lifetimes.
/// Overlapping rows merge as well as meeting ones. A merged row keeps the identifier of its earliest piece.
UnitemporalTable coalesceStar(const UnitemporalTable& table);

/// Equality of two tables as sets of (interval, payload), ignoring identifiers.
bool sameLifetimes(const UnitemporalTable& a, const UnitemporalTable& b);

}// namespace cedr

#endif// CEDR_TEMPORAL_HPP_
