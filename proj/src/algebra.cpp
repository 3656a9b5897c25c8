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
#include <map>
#include <set>

namespace cedr::algebra {

namespace {
constexpr std::ptrdiff_t kParallelThreshold = 64;

using IntervalList = std::vector<Interval>;

/// Sorted, merged (overlapping or meeting) intervals.
IntervalList mergeIntervals(IntervalList xs) {
    std::sort(xs.begin(), xs.end());
    IntervalList out;
    for (const auto& x : xs) {
        if (x.empty()) {
            continue;
        }
        if (!out.empty() && x.start <= out.back().end) {
            out.back().end = std::max(out.back().end, x.end);
        } else {
            out.push_back(x);
        }
    }
    return out;
}

/// a minus b, both merged.
IntervalList subtract(const IntervalList& a, const IntervalList& b) {
    IntervalList out;
    std::size_t j = 0;
    for (Interval cur : a) {
        while (j < b.size() && b[j].end <= cur.start) {
            ++j;
        }
        std::size_t k = j;
        while (k < b.size() && b[k].start < cur.end) {
            if (b[k].start > cur.start) {
                out.push_back({cur.start, b[k].start});
            }
            cur.start = std::max(cur.start, b[k].end);
            if (cur.empty()) {
                break;
            }
            ++k;
        }
        if (!cur.empty()) {
            out.push_back(cur);
        }
    }
    return out;
}

std::map<Payload, IntervalList> byPayload(const UnitemporalTable& t) {
    std::map<Payload, IntervalList> groups;
    for (const auto& e : t) {
        groups[e.payload].push_back(e.valid);
    }
    return groups;
}

/// Runs `body(i)` for every group index, in parallel when there is enough work, and
/// concatenates the per-group outputs in group order.
template<typename Body>
UnitemporalTable forEachGroup(std::ptrdiff_t n, Body&& body) {
    std::vector<UnitemporalTable> parts(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        parts[static_cast<std::size_t>(i)] = body(i);
    }
    UnitemporalTable out;
    for (auto& p : parts) {
        out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

UnitemporalTable emitIntervals(const Payload& payload, const IntervalList& xs) {
    UnitemporalTable out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        out.push_back({snapshotId(x.start, payload), x, payload});
    }
    return out;
}
}// namespace

const char* toString(Aggregate agg) {
    switch (agg) {
        case Aggregate::Count: return "count";
        case Aggregate::Sum: return "sum";
        case Aggregate::Avg: return "avg";
        case Aggregate::Max: return "max";
        case Aggregate::Min: return "min";
    }
    return "?";
}

std::string snapshotId(Timestamp start, const Payload& payload) { return idgen({start.toString(), payload.toString()}); }

bool numericLess(const Scalar& a, const Scalar& b) {
    const double x = a.asDouble();
    const double y = b.asDouble();
    if (x != y) {
        return x < y;
    }
    return a.value().index() < b.value().index();
}

UnitemporalTable project(const UnitemporalTable& input, const PayloadMap& f) {
    UnitemporalTable out(input.size());
    const auto n = static_cast<std::ptrdiff_t>(input.size());
#pragma omp parallel for if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& e = input[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = {e.id, e.valid, f(e.payload)};
    }
    return out;
}

UnitemporalTable select(const UnitemporalTable& input, const PayloadPredicate& f) {
    UnitemporalTable out;
    std::copy_if(input.begin(), input.end(), std::back_inserter(out), [&](const UnitemporalEvent& e) { return f(e.payload); });
    return out;
}

UnitemporalTable join(const UnitemporalTable& left, const UnitemporalTable& right, const JoinPredicate& theta) {
    return forEachGroup(static_cast<std::ptrdiff_t>(left.size()), [&](std::ptrdiff_t i) {
        const auto& l = left[static_cast<std::size_t>(i)];
        UnitemporalTable part;
        for (const auto& r : right) {
            const Interval both{std::max(l.valid.start, r.valid.start), std::min(l.valid.end, r.valid.end)};
            if (both.start < both.end && theta(l.payload, r.payload)) {
                part.push_back({idgen({l.id, r.id}), both, Payload::concat(l.payload, r.payload)});
            }
        }
        return part;
    });
}

UnitemporalTable normalizeSet(const UnitemporalTable& input) {
    auto groups = byPayload(input);
    std::vector<std::pair<Payload, IntervalList>> flat(groups.begin(), groups.end());
    return forEachGroup(static_cast<std::ptrdiff_t>(flat.size()), [&](std::ptrdiff_t i) {
        const auto& [payload, xs] = flat[static_cast<std::size_t>(i)];
        return emitIntervals(payload, mergeIntervals(xs));
    });
}

UnitemporalTable setUnion(const UnitemporalTable& a, const UnitemporalTable& b) {
    UnitemporalTable all = a;
    all.insert(all.end(), b.begin(), b.end());
    return normalizeSet(all);
}

UnitemporalTable difference(const UnitemporalTable& a, const UnitemporalTable& b) {
    auto left = byPayload(a);
    auto right = byPayload(b);
    std::vector<std::pair<Payload, IntervalList>> flat(left.begin(), left.end());
    return forEachGroup(static_cast<std::ptrdiff_t>(flat.size()), [&](std::ptrdiff_t i) {
        const auto& [payload, xs] = flat[static_cast<std::size_t>(i)];
        auto it = right.find(payload);
        IntervalList keep = mergeIntervals(xs);
        if (it != right.end()) {
            keep = subtract(keep, mergeIntervals(it->second));
        }
        return emitIntervals(payload, keep);
    });
}

namespace {
struct NumericOrder {
    bool operator()(const Scalar& a, const Scalar& b) const { return numericLess(a, b); }
};

/// Double sums are taken in value order.
struct Accumulator {
    Aggregate agg = Aggregate::Count;
    std::size_t count = 0;
    std::int64_t intSum = 0;
    std::size_t doubles = 0;
    std::multiset<Scalar, NumericOrder> ordered;

    void add(const Scalar& v) {
        ++count;
        if (agg == Aggregate::Count) {
            return;
        }
        if (v.isInteger()) {
            intSum += std::get<std::int64_t>(v.value());
        } else {
            ++doubles;
        }
        ordered.insert(v);
    }
    void remove(const Scalar& v) {
        --count;
        if (agg == Aggregate::Count) {
            return;
        }
        if (v.isInteger()) {
            intSum -= std::get<std::int64_t>(v.value());
        } else {
            --doubles;
        }
        ordered.erase(ordered.find(v));
    }
    double orderedSum() const {
        double sum = 0.0;
        for (const auto& v : ordered) {
            sum += v.asDouble();
        }
        return sum;
    }
    Scalar value() const {
        switch (agg) {
            case Aggregate::Count: return Scalar(static_cast<std::int64_t>(count));
            case Aggregate::Sum:
                if (doubles == 0) return Scalar(intSum);
                return Scalar(orderedSum());
            case Aggregate::Avg: return Scalar(orderedSum() / static_cast<double>(count));
            case Aggregate::Max: return *ordered.rbegin();
            case Aggregate::Min: return *ordered.begin();
        }
        return {};
    }
};

Payload groupKey(const Payload& p, const std::vector<std::string>& keys) {
    Payload key;
    for (const auto& k : keys) {
        if (const Scalar* v = p.find(k)) {
            key.set(k, *v);
        }
    }
    return key;
}
}// namespace

UnitemporalTable groupbyAggregate(const UnitemporalTable& input,
                                  const std::vector<std::string>& keys,
                                  Aggregate agg,
                                  const std::string& target,
                                  std::string outputName) {
    if (outputName.empty()) {
        outputName = toString(agg);
    }
    const UnitemporalTable rows = normalizeSet(input);
    std::map<Payload, std::vector<const UnitemporalEvent*>> groups;
    for (const auto& e : rows) {
        if (agg != Aggregate::Count) {
            const Scalar* v = e.payload.find(target);
            if (v == nullptr || !v->isNumeric()) {
                throw Error(ErrorKind::TypeMismatch, std::string(toString(agg)) + " needs numeric attribute '" + target + "' in "
                                                         + e.payload.toString());
            }
        }
        groups[groupKey(e.payload, keys)].push_back(&e);
    }
    std::vector<std::pair<Payload, std::vector<const UnitemporalEvent*>>> flat(groups.begin(), groups.end());

    return forEachGroup(static_cast<std::ptrdiff_t>(flat.size()), [&](std::ptrdiff_t gi) {
        const auto& [key, members] = flat[static_cast<std::size_t>(gi)];
        // Sweep over endpoints: ends are applied before starts at the same instant.
        struct Edge {
            Timestamp at;
            bool start;
            const UnitemporalEvent* row;
        };
        std::vector<Edge> edges;
        for (const auto* e : members) {
            edges.push_back({e->valid.start, true, e});
            if (e->valid.end.isFinite()) {
                edges.push_back({e->valid.end, false, e});
            }
        }
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.at != b.at ? a.at < b.at : (a.start < b.start);
        });
        Accumulator acc;
        acc.agg = agg;
        const Scalar none;
        UnitemporalTable part;
        std::optional<std::pair<Timestamp, Scalar>> open;// start of the current constant run
        auto close = [&](Timestamp at) {
            if (open && open->first < at) {
                Payload p = key;
                p.set(outputName, open->second);
                part.push_back({snapshotId(open->first, p), {open->first, at}, std::move(p)});
            }
            open.reset();
        };
        for (std::size_t i = 0; i < edges.size();) {
            const Timestamp at = edges[i].at;
            for (; i < edges.size() && edges[i].at == at; ++i) {
                const Scalar& v = agg == Aggregate::Count ? none : *edges[i].row->payload.find(target);
                if (edges[i].start) {
                    acc.add(v);
                } else {
                    acc.remove(v);
                }
            }
            if (acc.count == 0) {
                close(at);
                continue;
            }
            Scalar value = acc.value();
            if (!open || !(open->second == value)) {
                close(at);
                open.emplace(at, std::move(value));
            }
        }
        close(kInfinity);
        return part;
    });
}

UnitemporalTable alterLifetime(const UnitemporalTable& input, const LifetimeFunctions& fns) {
    UnitemporalTable out;
    out.reserve(input.size());
    for (const auto& e : input) {
        const Timestamp start = fns.start(e);
        const Timestamp length = fns.duration(e);
        if (length == Timestamp::zero() || start.isInfinite()) {
            continue;
        }
        out.push_back({e.id, {start, start + length}, e.payload});
    }
    return out;
}

UnitemporalTable window(const UnitemporalTable& input, Timestamp length) {
    return alterLifetime(input,
                         {[](const UnitemporalEvent& e) { return e.valid.start; },
                          [length](const UnitemporalEvent& e) { return std::min(e.valid.end - e.valid.start, length); }});
}

UnitemporalTable hoppingWindow(const UnitemporalTable& input, Timestamp period) {
    if (period == Timestamp::zero() || period.isInfinite()) {
        throw Error(ErrorKind::InvalidArgument, "hopping period must be finite and positive");
    }
    return alterLifetime(input,
                         {[period](const UnitemporalEvent& e) {
                              return Timestamp(e.valid.start.ticks() / period.ticks() * period.ticks());
                          },
                          [period](const UnitemporalEvent&) { return period; }});
}

UnitemporalTable inserts(const UnitemporalTable& input) {
    return alterLifetime(input, {[](const UnitemporalEvent& e) { return e.valid.start; },
                                 [](const UnitemporalEvent&) { return kInfinity; }});
}

UnitemporalTable deletes(const UnitemporalTable& input) {
    return alterLifetime(input, {[](const UnitemporalEvent& e) { return e.valid.end; },
                                 [](const UnitemporalEvent&) { return kInfinity; }});
}

}// namespace cedr::algebra
