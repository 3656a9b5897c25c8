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

#include <cedr/algebra.hpp>
#include <cedr/error.hpp>
#include <cedr/pattern.hpp>

#include <algorithm>

namespace cedr {

std::string idgen(const std::vector<std::string>& ids) {
    if (ids.empty()) {
        throw Error(ErrorKind::EmptyInput, "idgen needs at least one identifier");
    }
    std::string out;
    for (const auto& id : ids) {
        out += std::to_string(id.size());
        out += ':';
        out += id;
    }
    return out;
}

}// namespace cedr

namespace cedr::pattern {

namespace {
constexpr std::ptrdiff_t kParallelThreshold = 32;

struct Tagged {
    const PatternEvent* event;
    std::size_t stream;
};

bool byValidStart(const PatternEvent* a, const PatternEvent* b) { return a->valid.start < b->valid.start; }

/// Events of all inputs, ordered by V_s.
std::vector<Tagged> mergedByStart(std::span<const PatternStream> inputs) {
    std::vector<Tagged> all;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        for (const auto& e : inputs[s]) {
            all.push_back({&e, s});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return byValidStart(a.event, b.event); });
    return all;
}

template<typename Body>
PatternStream parallelCollect(std::ptrdiff_t n, Body&& body) {
    std::vector<PatternStream> parts(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        body(i, parts[static_cast<std::size_t>(i)]);
    }
    PatternStream out;
    for (auto& p : parts) {
        out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool passes(const CompositeFilter& filter, const Payload& p) { return !filter || filter(p); }
bool blocks(const BlockPredicate& block, const Payload& candidate, const Payload& blocker) {
    return !block || block(candidate, blocker);
}

/// Events sorted by V_s, for range scans.
std::vector<const PatternEvent*> sortedByStart(const PatternStream& events) {
    std::vector<const PatternEvent*> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        out.push_back(&e);
    }
    std::stable_sort(out.begin(), out.end(), byValidStart);
    return out;
}

/// True when some blocker has lo < V_s < hi and satisfies `block` against the candidate payload.
bool anyStrictlyBetween(const std::vector<const PatternEvent*>& sorted,
                        Timestamp lo,
                        Timestamp hi,
                        const Payload& candidate,
                        const BlockPredicate& block) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), lo, [](Timestamp t, const PatternEvent* e) { return t < e->valid.start; });
    for (; it != sorted.end() && (*it)->valid.start < hi; ++it) {
        if (blocks(block, candidate, (*it)->payload)) {
            return true;
        }
    }
    return false;
}

/// Ordered sequences e1 < e2 < ... < ek (one per input) within scope; calls `emit` with contributors.
template<typename Emit>
void enumerateSequences(const std::vector<std::vector<const PatternEvent*>>& streams,
                        std::vector<const PatternEvent*>& chain,
                        Timestamp limit,
                        Emit&& emit) {
    const std::size_t level = chain.size();
    if (level == streams.size()) {
        emit(chain);
        return;
    }
    const Timestamp after = chain.back()->valid.start;
    const auto& candidates = streams[level];
    auto it = std::upper_bound(candidates.begin(), candidates.end(), after, [](Timestamp t, const PatternEvent* e) { return t < e->valid.start; });
    for (; it != candidates.end() && (*it)->valid.start <= limit; ++it) {
        chain.push_back(*it);
        enumerateSequences(streams, chain, limit, emit);
        chain.pop_back();
    }
}

template<typename Emit>
void forEachSequence(std::span<const PatternStream> inputs, Timestamp scope, std::size_t firstIndex, const std::vector<std::vector<const PatternEvent*>>& streams, Emit&& emit) {
    const PatternEvent* first = streams[0][firstIndex];
    std::vector<const PatternEvent*> chain{first};
    enumerateSequences(streams, chain, first->valid.start + scope, emit);
    (void) inputs;
}

std::vector<std::vector<const PatternEvent*>> sortedStreams(std::span<const PatternStream> inputs) {
    std::vector<std::vector<const PatternEvent*>> streams;
    streams.reserve(inputs.size());
    for (const auto& s : inputs) {
        streams.push_back(sortedByStart(s));
    }
    return streams;
}
}// namespace

PatternEvent makeComposite(const std::vector<const PatternEvent*>& contributors, Timestamp scope) {
    const PatternEvent& first = *contributors.front();
    const PatternEvent& last = *contributors.back();
    PatternEvent out;
    std::vector<Payload> payloads;
    out.rootTime = first.rootTime;
    for (const auto* c : contributors) {
        out.contributors.push_back(c->id);
        out.rootTime = std::min(out.rootTime, c->rootTime);
        payloads.push_back(c->payload);
    }
    out.id = idgen(out.contributors);
    out.valid = {last.valid.start, first.valid.start + scope};
    out.occurrence = last.occurrence;
    out.payload = Payload::concatRange(payloads.begin(), payloads.end());
    return out;
}

PatternStream atleast(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter) {
    if (n == 0 || n > inputs.size()) {
        throw Error(ErrorKind::ArityMismatch, "ATLEAST needs 1 <= n <= k, got n=" + std::to_string(n) + " k=" + std::to_string(inputs.size()));
    }
    const std::vector<Tagged> all = mergedByStart(inputs);
    return parallelCollect(static_cast<std::ptrdiff_t>(all.size()), [&](std::ptrdiff_t anchor, PatternStream& out) {
        const Tagged& head = all[static_cast<std::size_t>(anchor)];
        const Timestamp limit = head.event->valid.start + scope;
        std::vector<const PatternEvent*> chain{head.event};
        std::vector<bool> used(inputs.size(), false);
        used[head.stream] = true;
        auto extend = [&](auto&& self, std::size_t from) -> void {
            if (chain.size() == n) {
                PatternEvent c = makeComposite(chain, scope);
                if (passes(filter, c.payload)) {
                    out.push_back(std::move(c));
                }
                return;
            }
            for (std::size_t j = from; j < all.size() && all[j].event->valid.start <= limit; ++j) {
                if (used[all[j].stream] || !(chain.back()->valid.start < all[j].event->valid.start)) {
                    continue;
                }
                used[all[j].stream] = true;
                chain.push_back(all[j].event);
                self(self, j + 1);
                chain.pop_back();
                used[all[j].stream] = false;
            }
        };
        extend(extend, static_cast<std::size_t>(anchor) + 1);
    });
}

PatternStream sequence(std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter) {
    if (inputs.size() < 2) {
        throw Error(ErrorKind::ArityMismatch, "SEQUENCE needs at least two inputs");
    }
    const auto streams = sortedStreams(inputs);
    return parallelCollect(static_cast<std::ptrdiff_t>(streams[0].size()), [&](std::ptrdiff_t i, PatternStream& out) {
        forEachSequence(inputs, scope, static_cast<std::size_t>(i), streams, [&](const std::vector<const PatternEvent*>& chain) {
            PatternEvent c = makeComposite(chain, scope);
            if (passes(filter, c.payload)) {
                out.push_back(std::move(c));
            }
        });
    });
}

PatternStream all(std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter) {
    return atleast(inputs.size(), inputs, scope, filter);
}

PatternStream any(std::span<const PatternStream> inputs, const CompositeFilter& filter) {
    if (inputs.empty()) {
        return {};
    }
    return atleast(1, inputs, Timestamp(1), filter);
}

PatternStream atmost(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const CompositeFilter& filter) {
    if (scope == Timestamp::zero() || scope.isInfinite()) {
        throw Error(ErrorKind::InvalidArgument, "ATMOST scope must be finite and positive");
    }
    const std::vector<Tagged> all = mergedByStart(inputs);
    UnitemporalTable points;
    points.reserve(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        points.push_back({std::to_string(i), {all[i].event->valid.start, all[i].event->valid.start + Timestamp(1)},
                          Payload{{"seq", static_cast<std::int64_t>(i)}}});
    }
    const UnitemporalTable lifetimes = algebra::alterLifetime(
        points, {[](const UnitemporalEvent& e) { return e.valid.start; }, [scope](const UnitemporalEvent&) { return scope; }});
    const UnitemporalTable counts = algebra::groupbyAggregate(lifetimes, {}, algebra::Aggregate::Count, "", "count");
    auto countAt = [&](Timestamp t) -> std::int64_t {
        for (const auto& row : counts) {
            if (row.valid.contains(t)) {
                return std::get<std::int64_t>(row.payload.find("count")->value());
            }
        }
        return 0;
    };
    PatternStream out;
    for (const auto& tagged : all) {
        const PatternEvent& e = *tagged.event;
        const Timestamp probe = e.valid.start + scope - Timestamp(1);
        if (countAt(probe) > static_cast<std::int64_t>(n)) {
            continue;
        }
        PatternEvent c = makeComposite({&e}, scope);
        if (passes(filter, c.payload)) {
            out.push_back(std::move(c));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

PatternStream unless(const PatternStream& first, const PatternStream& blockers, Timestamp scope, const BlockPredicate& block) {
    const auto sorted = sortedByStart(blockers);
    return parallelCollect(static_cast<std::ptrdiff_t>(first.size()), [&](std::ptrdiff_t i, PatternStream& out) {
        const PatternEvent& e1 = first[static_cast<std::size_t>(i)];
        const Timestamp end = e1.valid.start + scope;
        if (anyStrictlyBetween(sorted, e1.valid.start, end, e1.payload, block)) {
            return;
        }
        out.push_back(PatternEvent{e1.id, {e1.valid.start, end}, e1.occurrence, e1.rootTime, {e1.id}, e1.payload});
    });
}

PatternStream notSequence(const PatternStream& blockers,
                          std::span<const PatternStream> inputs,
                          Timestamp scope,
                          const CompositeFilter& filter,
                          const BlockPredicate& block) {
    if (inputs.size() < 2) {
        throw Error(ErrorKind::ArityMismatch, "NOT needs a SEQUENCE of at least two inputs");
    }
    const auto sortedBlockers = sortedByStart(blockers);
    const auto streams = sortedStreams(inputs);
    return parallelCollect(static_cast<std::ptrdiff_t>(streams[0].size()), [&](std::ptrdiff_t i, PatternStream& out) {
        forEachSequence(inputs, scope, static_cast<std::size_t>(i), streams, [&](const std::vector<const PatternEvent*>& chain) {
            PatternEvent c = makeComposite(chain, scope);
            if (!passes(filter, c.payload)) {
                return;
            }
            if (anyStrictlyBetween(sortedBlockers, chain.front()->valid.start, chain.back()->valid.start, c.payload, block)) {
                return;
            }
            out.push_back(std::move(c));
        });
    });
}

PatternStream cancelWhen(const PatternStream& first, const PatternStream& blockers, const BlockPredicate& block) {
    const auto sorted = sortedByStart(blockers);
    return parallelCollect(static_cast<std::ptrdiff_t>(first.size()), [&](std::ptrdiff_t i, PatternStream& out) {
        const PatternEvent& e1 = first[static_cast<std::size_t>(i)];
        if (!anyStrictlyBetween(sorted, e1.rootTime, e1.valid.start, e1.payload, block)) {
            out.push_back(e1);
        }
    });
}

namespace {
/// Clips [start, end) into the slice; the end never drops below the clipped start.
Interval clipOccurrence(Interval occ, const Interval& slice) {
    occ.start = std::max(occ.start, slice.start);
    occ.end = std::min(std::max(occ.end, occ.start), slice.end);
    return occ;
}
}// namespace

HistoryTable slice(const HistoryTable& table, const std::optional<Interval>& occurrence, const std::optional<Interval>& valid) {
    std::vector<TritemporalEvent> out;
    for (auto row : table) {
        if (valid) {
            if (!row.valid.intersects(*valid)) {
                continue;
            }
            row.valid = {std::max(row.valid.start, valid->start), std::min(row.valid.end, valid->end)};
        }
        if (occurrence) {
            if (row.occurrence.start >= occurrence->end) {
                continue;
            }
            row.occurrence = clipOccurrence(row.occurrence, *occurrence);
        }
        out.push_back(std::move(row));
    }
    return HistoryTable(std::move(out));
}

PatternStream sliceEvents(const PatternStream& events, const std::optional<Interval>& occurrence, const std::optional<Interval>& valid) {
    PatternStream out;
    for (auto e : events) {
        if (valid) {
            if (!e.valid.intersects(*valid)) {
                continue;
            }
            e.valid = {std::max(e.valid.start, valid->start), std::min(e.valid.end, valid->end)};
        }
        if (occurrence) {
            if (!e.occurrence.intersects(*occurrence)) {
                continue;
            }
            e.occurrence = clipOccurrence(e.occurrence, *occurrence);
        }
        out.push_back(std::move(e));
    }
    return out;
}

}// namespace cedr::pattern
