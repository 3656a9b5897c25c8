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

#ifndef CEDR_ALGEBRA_HPP_
#define CEDR_ALGEBRA_HPP_

#include <functional>
#include <string>
#include <vector>

#include <cedr/events.hpp>

/**
 * Run-time operators over unitemporal ideal history tables.
 *
 * project/select/join act row by row. union, difference and groupbyAggregate follow
 * snapshot semantics: the output at every instant is the relational operator applied to
 * the input snapshots, and output rows are maximal intervals per payload. Relations are
 * sets, so identical payloads with overlapping lifetimes count once.
 *
 * alterLifetime and the operators built on it (window, hoppingWindow, inserts, deletes)
 * remap lifetimes and are not insensitive to how a lifetime is split into events.
 *
 * Kernels parallelise over payload groups or left-hand rows with OpenMP; the serial
 * brute-force versions live in cedr::reference.
 */
namespace cedr::algebra {

using PayloadMap = std::function<Payload(const Payload&)>;
using PayloadPredicate = std::function<bool(const Payload&)>;
using JoinPredicate = std::function<bool(const Payload&, const Payload&)>;

enum class Aggregate { Count, Sum, Avg, Max, Min };

const char* toString(Aggregate agg);

struct LifetimeFunctions {
    std::function<Timestamp(const UnitemporalEvent&)> start;
    std::function<Timestamp(const UnitemporalEvent&)> duration;
};

/// Identifier of a snapshot-operator output row; a function of its start and payload only.
std::string snapshotId(Timestamp start, const Payload& payload);

UnitemporalTable project(const UnitemporalTable& input, const PayloadMap& f);
UnitemporalTable select(const UnitemporalTable& input, const PayloadPredicate& f);

/// Pairs with a non-empty interval intersection satisfying theta; payloads concatenated
/// (colliding names become name#l / name#r).
UnitemporalTable join(const UnitemporalTable& left, const UnitemporalTable& right, const JoinPredicate& theta);

UnitemporalTable setUnion(const UnitemporalTable& a, const UnitemporalTable& b);
UnitemporalTable difference(const UnitemporalTable& a, const UnitemporalTable& b);

/**
 * Per group of `keys` and per instant, the aggregate of `target` over the payloads valid
 * at that instant. Output payload: the key attributes plus `outputName` (defaults to the
 * lower-case aggregate name). COUNT ignores `target`. Throws Error(TypeMismatch) when
 * a row lacks a numeric `target` for SUM/AVG/MAX/MIN.
 */
UnitemporalTable groupbyAggregate(const UnitemporalTable& input,
                                  const std::vector<std::string>& keys,
                                  Aggregate agg,
                                  const std::string& target,
                                  std::string outputName = {});

/// Each row moved to [start(e), start(e) + duration(e)); zero durations are dropped.
UnitemporalTable alterLifetime(const UnitemporalTable& input, const LifetimeFunctions& fns);

/// Lifetimes clipped to at most `length` ticks.
UnitemporalTable window(const UnitemporalTable& input, Timestamp length);

/// Every row snapped to the hop [floor(V_s / period) * period, + period).
UnitemporalTable hoppingWindow(const UnitemporalTable& input, Timestamp period);

UnitemporalTable inserts(const UnitemporalTable& input);

/// Rows that never end produce nothing.
UnitemporalTable deletes(const UnitemporalTable& input);

/// Set-semantics normal form: same-payload rows that overlap or meet are merged.
UnitemporalTable normalizeSet(const UnitemporalTable& input);

/// Numeric order used by MAX/MIN: by value, then int before double.
bool numericLess(const Scalar& a, const Scalar& b);

}// namespace cedr::algebra

#endif// CEDR_ALGEBRA_HPP_
