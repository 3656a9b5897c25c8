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
#include <cedr/reference.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace cedr::reference {

namespace {

using Snapshot = std::set<Payload>;

Snapshot snapshotAt(const UnitemporalTable& t, Timestamp at) {
    Snapshot s;
    for (const auto& e : t) {
        if (e.valid.contains(at)) {
            s.insert(e.payload);
        }
    }
    return s;
}

std::vector<Timestamp> endpoints(std::initializer_list<const UnitemporalTable*> tables) {
    std::vector<Timestamp> points;
    for (const auto* t : tables) {
        for (const auto& e : *t) {
            points.push_back(e.valid.start);
            if (e.valid.end.isFinite()) {
                points.push_back(e.valid.end);
            }
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

/// Evaluates `at(t)` on every elementary interval and joins consecutive intervals per payload.
template<typename At>
UnitemporalTable bySnapshot(const std::vector<Timestamp>& points, At&& at) {
    std::map<Payload, std::vector<Interval>> lifetimes;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Interval piece{points[i], i + 1 < points.size() ? points[i + 1] : kInfinity};
        for (const auto& p : at(piece.start)) {
            auto& xs = lifetimes[p];
            if (!xs.empty() && xs.back().end == piece.start) {
                xs.back().end = piece.end;
            } else {
                xs.push_back(piece);
            }
        }
    }
    UnitemporalTable out;
    for (const auto& [payload, xs] : lifetimes) {
        for (const auto& x : xs) {
            out.push_back({algebra::snapshotId(x.start, payload), x, payload});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Scalar aggregateOf(algebra::Aggregate agg, std::vector<Scalar> values) {
    std::sort(values.begin(), values.end(), algebra::numericLess);
    switch (agg) {
        case algebra::Aggregate::Count: return Scalar(static_cast<std::int64_t>(values.size()));
        case algebra::Aggregate::Max: return values.back();
        case algebra::Aggregate::Min: return values.front();
        case algebra::Aggregate::Sum:
        case algebra::Aggregate::Avg: break;
    }
    const bool integral = std::all_of(values.begin(), values.end(), [](const Scalar& v) { return v.isInteger(); });
    if (agg == algebra::Aggregate::Sum && integral) {
        std::int64_t sum = 0;
        for (const auto& v : values) {
            sum += std::get<std::int64_t>(v.value());
        }
        return Scalar(sum);
    }
    double sum = 0.0;
    for (const auto& v : values) {
        sum += v.asDouble();
    }
    if (agg == algebra::Aggregate::Avg) {
        return Scalar(sum / static_cast<double>(values.size()));
    }
    return Scalar(sum);
}

PatternEvent composite(const std::vector<const PatternEvent*>& chain, Timestamp scope) {
    PatternEvent out;
    std::vector<std::string> ids;
    std::vector<Payload> payloads;
    Timestamp root = kInfinity;
    for (const auto* e : chain) {
        ids.push_back(e->id);
        payloads.push_back(e->payload);
        root = std::min(root, e->rootTime);
    }
    out.id = idgen(ids);
    out.contributors = ids;
    out.rootTime = root;
    out.valid = {chain.back()->valid.start, chain.front()->valid.start + scope};
    out.occurrence = chain.back()->occurrence;
    out.payload = Payload::concatRange(payloads.begin(), payloads.end());
    return out;
}

bool accepted(const pattern::CompositeFilter& filter, const Payload& p) { return !filter || filter(p); }
bool blocking(const pattern::BlockPredicate& block, const Payload& c, const Payload& b) { return !block || block(c, b); }

bool strictlyIncreasing(const std::vector<const PatternEvent*>& chain) {
    for (std::size_t i = 1; i < chain.size(); ++i) {
        if (!(chain[i - 1]->valid.start < chain[i]->valid.start)) {
            return false;
        }
    }
    return true;
}

bool withinScope(const std::vector<const PatternEvent*>& chain, Timestamp scope) {
    return chain.back()->valid.start - chain.front()->valid.start <= scope;
}

/// Every choice of one event per stream, in stream order.
void cartesian(std::span<const PatternStream> inputs,
               std::vector<const PatternEvent*>& chain,
               const std::function<void(const std::vector<const PatternEvent*>&)>& visit) {
    if (chain.size() == inputs.size()) {
        visit(chain);
        return;
    }
    for (const auto& e : inputs[chain.size()]) {
        chain.push_back(&e);
        cartesian(inputs, chain, visit);
        chain.pop_back();
    }
}

bool blockedBetween(const PatternStream& blockers, Timestamp lo, Timestamp hi, const Payload& candidate, const pattern::BlockPredicate& block) {
    return std::any_of(blockers.begin(), blockers.end(), [&](const PatternEvent& b) {
        return lo < b.valid.start && b.valid.start < hi && blocking(block, candidate, b.payload);
    });
}

PatternStream sorted(PatternStream s) {
    std::sort(s.begin(), s.end());
    return s;
}

}// namespace

UnitemporalTable project(const UnitemporalTable& input, const algebra::PayloadMap& f) {
    UnitemporalTable out;
    for (const auto& e : input) {
        out.push_back({e.id, e.valid, f(e.payload)});
    }
    return out;
}

UnitemporalTable select(const UnitemporalTable& input, const algebra::PayloadPredicate& f) {
    UnitemporalTable out;
    for (const auto& e : input) {
        if (f(e.payload)) {
            out.push_back(e);
        }
    }
    return out;
}

UnitemporalTable join(const UnitemporalTable& left, const UnitemporalTable& right, const algebra::JoinPredicate& theta) {
    UnitemporalTable out;
    for (const auto& l : left) {
        for (const auto& r : right) {
            const Timestamp s = std::max(l.valid.start, r.valid.start);
            const Timestamp e = std::min(l.valid.end, r.valid.end);
            if (s < e && theta(l.payload, r.payload)) {
                out.push_back({idgen({l.id, r.id}), {s, e}, Payload::concat(l.payload, r.payload)});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

UnitemporalTable setUnion(const UnitemporalTable& a, const UnitemporalTable& b) {
    return bySnapshot(endpoints({&a, &b}), [&](Timestamp t) {
        Snapshot s = snapshotAt(a, t);
        s.merge(snapshotAt(b, t));
        return s;
    });
}

UnitemporalTable difference(const UnitemporalTable& a, const UnitemporalTable& b) {
    return bySnapshot(endpoints({&a, &b}), [&](Timestamp t) {
        Snapshot out;
        const Snapshot right = snapshotAt(b, t);
        for (const auto& p : snapshotAt(a, t)) {
            if (!right.contains(p)) {
                out.insert(p);
            }
        }
        return out;
    });
}

UnitemporalTable groupbyAggregate(const UnitemporalTable& input,
                                  const std::vector<std::string>& keys,
                                  algebra::Aggregate agg,
                                  const std::string& target,
                                  std::string outputName) {
    if (outputName.empty()) {
        outputName = algebra::toString(agg);
    }
    for (const auto& e : input) {
        const Scalar* v = e.payload.find(target);
        if (agg != algebra::Aggregate::Count && (v == nullptr || !v->isNumeric())) {
            throw Error(ErrorKind::TypeMismatch, "non-numeric aggregate target");
        }
    }
    return bySnapshot(endpoints({&input}), [&](Timestamp t) {
        std::map<Payload, std::vector<Scalar>> groups;
        for (const auto& p : snapshotAt(input, t)) {
            Payload key;
            for (const auto& k : keys) {
                if (const Scalar* v = p.find(k)) {
                    key.set(k, *v);
                }
            }
            const Scalar* v = p.find(target);
            groups[key].push_back(v != nullptr ? *v : Scalar());
        }
        Snapshot out;
        for (auto& [key, values] : groups) {
            Payload row = key;
            row.set(outputName, aggregateOf(agg, std::move(values)));
            out.insert(std::move(row));
        }
        return out;
    });
}

UnitemporalTable alterLifetime(const UnitemporalTable& input, const algebra::LifetimeFunctions& fns) {
    UnitemporalTable out;
    for (const auto& e : input) {
        const Timestamp s = fns.start(e);
        const Timestamp d = fns.duration(e);
        if (s.isFinite() && d > Timestamp::zero()) {
            out.push_back({e.id, {s, s + d}, e.payload});
        }
    }
    return out;
}

UnitemporalTable window(const UnitemporalTable& input, Timestamp length) {
    UnitemporalTable out;
    for (const auto& e : input) {
        const Timestamp end = std::min(e.valid.end, e.valid.start + length);
        if (e.valid.start < end) {
            out.push_back({e.id, {e.valid.start, end}, e.payload});
        }
    }
    return out;
}

UnitemporalTable hoppingWindow(const UnitemporalTable& input, Timestamp period) {
    if (period == Timestamp::zero() || period.isInfinite()) {
        throw Error(ErrorKind::InvalidArgument, "hopping period must be finite and positive");
    }
    UnitemporalTable out;
    for (const auto& e : input) {
        Timestamp hop = Timestamp::zero();
        while (hop + period <= e.valid.start) {
            hop = hop + period;
        }
        out.push_back({e.id, {hop, hop + period}, e.payload});
    }
    return out;
}

UnitemporalTable inserts(const UnitemporalTable& input) {
    UnitemporalTable out;
    for (const auto& e : input) {
        out.push_back({e.id, {e.valid.start, kInfinity}, e.payload});
    }
    return out;
}

UnitemporalTable deletes(const UnitemporalTable& input) {
    UnitemporalTable out;
    for (const auto& e : input) {
        if (e.valid.end.isFinite()) {
            out.push_back({e.id, {e.valid.end, kInfinity}, e.payload});
        }
    }
    return out;
}

PatternStream atleast(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter) {
    if (n == 0 || n > inputs.size()) {
        throw Error(ErrorKind::ArityMismatch, "ATLEAST arity");
    }
    std::vector<std::pair<const PatternEvent*, std::size_t>> events;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        for (const auto& e : inputs[s]) {
            events.emplace_back(&e, s);
        }
    }
    PatternStream out;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t from) {
        if (pick.size() == n) {
            std::set<std::size_t> streams;
            std::vector<const PatternEvent*> chain;
            for (auto i : pick) {
                streams.insert(events[i].second);
                chain.push_back(events[i].first);
            }
            if (streams.size() != n) {
                return;
            }
            std::sort(chain.begin(), chain.end(), [](const PatternEvent* a, const PatternEvent* b) { return a->valid.start < b->valid.start; });
            if (!strictlyIncreasing(chain) || !withinScope(chain, scope)) {
                return;
            }
            PatternEvent c = composite(chain, scope);
            if (accepted(filter, c.payload)) {
                out.push_back(std::move(c));
            }
            return;
        }
        for (std::size_t i = from; i < events.size(); ++i) {
            pick.push_back(i);
            choose(i + 1);
            pick.pop_back();
        }
    };
    choose(0);
    return sorted(std::move(out));
}

PatternStream sequence(std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter) {
    if (inputs.size() < 2) {
        throw Error(ErrorKind::ArityMismatch, "SEQUENCE arity");
    }
    PatternStream out;
    std::vector<const PatternEvent*> chain;
    cartesian(inputs, chain, [&](const std::vector<const PatternEvent*>& c) {
        if (strictlyIncreasing(c) && withinScope(c, scope)) {
            PatternEvent e = composite(c, scope);
            if (accepted(filter, e.payload)) {
                out.push_back(std::move(e));
            }
        }
    });
    return sorted(std::move(out));
}

PatternStream all(std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter) {
    return atleast(inputs.size(), inputs, scope, filter);
}

PatternStream any(std::span<const PatternStream> inputs, const pattern::CompositeFilter& filter) {
    PatternStream out;
    for (const auto& s : inputs) {
        for (const auto& e : s) {
            PatternEvent c = composite({&e}, Timestamp(1));
            if (accepted(filter, c.payload)) {
                out.push_back(std::move(c));
            }
        }
    }
    return sorted(std::move(out));
}

PatternStream atmost(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter) {
    if (scope == Timestamp::zero() || scope.isInfinite()) {
        throw Error(ErrorKind::InvalidArgument, "ATMOST scope");
    }
    PatternStream out;
    for (const auto& s : inputs) {
        for (const auto& e : s) {
            std::size_t count = 0;
            for (const auto& t : inputs) {
                for (const auto& other : t) {
                    if (e.valid.start <= other.valid.start && other.valid.start < e.valid.start + scope) {
                        ++count;
                    }
                }
            }
            if (count > n) {
                continue;
            }
            PatternEvent c = composite({&e}, scope);
            if (accepted(filter, c.payload)) {
                out.push_back(std::move(c));
            }
        }
    }
    return sorted(std::move(out));
}

PatternStream unless(const PatternStream& first, const PatternStream& blockers, Timestamp scope, const pattern::BlockPredicate& block) {
    PatternStream out;
    for (const auto& e1 : first) {
        const Timestamp end = e1.valid.start + scope;
        if (!blockedBetween(blockers, e1.valid.start, end, e1.payload, block)) {
            out.push_back({e1.id, {e1.valid.start, end}, e1.occurrence, e1.rootTime, {e1.id}, e1.payload});
        }
    }
    return sorted(std::move(out));
}

PatternStream notSequence(const PatternStream& blockers,
                          std::span<const PatternStream> inputs,
                          Timestamp scope,
                          const pattern::CompositeFilter& filter,
                          const pattern::BlockPredicate& block) {
    if (inputs.size() < 2) {
        throw Error(ErrorKind::ArityMismatch, "NOT arity");
    }
    PatternStream out;
    std::vector<const PatternEvent*> chain;
    cartesian(inputs, chain, [&](const std::vector<const PatternEvent*>& c) {
        if (!strictlyIncreasing(c) || !withinScope(c, scope)) {
            return;
        }
        PatternEvent e = composite(c, scope);
        if (accepted(filter, e.payload) && !blockedBetween(blockers, c.front()->valid.start, c.back()->valid.start, e.payload, block)) {
            out.push_back(std::move(e));
        }
    });
    return sorted(std::move(out));
}

PatternStream cancelWhen(const PatternStream& first, const PatternStream& blockers, const pattern::BlockPredicate& block) {
    PatternStream out;
    for (const auto& e1 : first) {
        if (!blockedBetween(blockers, e1.rootTime, e1.valid.start, e1.payload, block)) {
            out.push_back(e1);
        }
    }
    return sorted(std::move(out));
}

}// namespace cedr::reference
