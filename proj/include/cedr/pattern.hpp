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

#ifndef CEDR_PATTERN_HPP_
#define CEDR_PATTERN_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <cedr/events.hpp>

namespace cedr {

/// Injective over sequences: length-prefixed concatenation ("1:a", "1:a1:b", ...).
/// Throws Error(EmptyInput) for an empty sequence.
std::string idgen(const std::vector<std::string>& ids);

}// namespace cedr

/**
 * WHEN-clause operators evaluated over ideal (retraction-free) bitemporal inputs.
 *
 * Composite outputs take id = idgen(contributor ids), occurrence interval and V_s from
 * the last contributor, V_e = first contributor V_s + w, root time = minimum contributor
 * root time, and the payloads concatenated in contributor order. Orderings between
 * contributors are strict; the scope bound between first and last contributor is
 * inclusive.
 */
namespace cedr::pattern {

/// Filters composite outputs; sees the concatenated payload.
using CompositeFilter = std::function<bool(const Payload&)>;

/// Decides whether `blocker` may negate `candidate`; both payloads are the raw event payloads.
using BlockPredicate = std::function<bool(const Payload& candidate, const Payload& blocker)>;

PatternStream atleast(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter = {});

PatternStream sequence(std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter = {});

/// ATLEAST(k, inputs, scope)
PatternStream all(std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter = {});

/// ATLEAST(1, inputs, 1)
PatternStream any(std::span<const PatternStream> inputs, const CompositeFilter& filter = {});

/**
 * For each event e of any input, emits a single-contributor composite (V_e = e.V_s + scope)
 * when at most n input events have V_s in [e.V_s, e.V_s + scope). Counting runs through the
 * run-time algebra: each event becomes a lifetime of length `scope`, a COUNT aggregate
 * gives the number of live lifetimes per instant, and the anchor keeps its composite when
 * the count at e.V_s + scope - 1 is at most n.
 */
PatternStream atmost(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter = {});

/// E1 events not followed by a qualifying E2 with e1.V_s < e2.V_s < e1.V_s + scope.
PatternStream unless(const PatternStream& first, const PatternStream& blockers, Timestamp scope, const BlockPredicate& block = {});

/// Outputs of sequence(inputs, scope) with no qualifying blocker strictly between the first
/// and last contributor V_s.
PatternStream notSequence(const PatternStream& blockers,
                          std::span<const PatternStream> inputs,
                          Timestamp scope,
                          const CompositeFilter& filter = {},
                          const BlockPredicate& block = {});

/// E1 events with no qualifying E2 such that e1.rt < e2.V_s < e1.V_s.
PatternStream cancelWhen(const PatternStream& first, const PatternStream& blockers, const BlockPredicate& block = {});

/**
 * Temporal slicing. Rows are kept when their valid interval meets `valid` and their
 * occurrence start precedes the end of `occurrence`; both intervals are then clipped.
 * A retraction that ends before the slice becomes a removal at the slice start, so the
 * sliced table stays a consistent history.
 */
HistoryTable slice(const HistoryTable& table, const std::optional<Interval>& occurrence, const std::optional<Interval>& valid);

/// Slicing for ideal events; events whose clipped intervals are empty are dropped.
PatternStream sliceEvents(const PatternStream& events, const std::optional<Interval>& occurrence, const std::optional<Interval>& valid);

/// Composite header for contributors given in order.
PatternEvent makeComposite(const std::vector<const PatternEvent*>& contributors, Timestamp scope);

}// namespace cedr::pattern

#endif// CEDR_PATTERN_HPP_
