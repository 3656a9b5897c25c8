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

#ifndef CEDR_TESTS_SUPPORT_HPP_
#define CEDR_TESTS_SUPPORT_HPP_

#include <cedr/disorder.hpp>
#include <cedr/engine.hpp>
#include <cedr/events.hpp>
#include <cedr/temporal.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace cedr::testing {

using Rng = std::mt19937_64;

inline std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); }

inline bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

inline TritemporalEvent row(std::string lineage, Timestamp os, Timestamp oe, Timestamp cs, Timestamp ce = kInfinity) {
    TritemporalEvent r;
    r.lineage = std::move(lineage);
    r.id = "e0";
    r.valid = {1, kInfinity};
    r.occurrence = {os, oe};
    r.arrival = {cs, ce};
    return r;
}

/// Small payload domain so that equal payloads meet and overlap often.
inline Payload smallPayload(Rng& rng) { return Payload{{"k", static_cast<std::int64_t>(uniform(rng, 0, 2))}, {"v", static_cast<std::int64_t>(uniform(rng, 0, 4))}}; }

/// Ideal rows for unitemporal operators: valid = occurrence = lifetime.
inline std::vector<TritemporalEvent> randomLifetimes(Rng& rng, std::size_t n, std::uint64_t horizon, const std::string& prefix) {
    std::vector<TritemporalEvent> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp s = uniform(rng, 0, horizon - 1);
        const Timestamp e = chance(rng, 0.15) ? kInfinity : Timestamp(std::min<std::uint64_t>(horizon, s.ticks() + uniform(rng, 1, 12)));
        TritemporalEvent r;
        r.lineage = prefix + std::to_string(i);
        r.id = r.lineage;
        r.valid = {s, e};
        r.occurrence = {s, e};
        r.arrival = {Timestamp(i + 1), kInfinity};
        r.payload = smallPayload(rng);
        out.push_back(std::move(r));
    }
    return out;
}

/// Ideal primitive events: short valid intervals, occurrence starting at V_s.
inline std::vector<TritemporalEvent> randomPrimitives(Rng& rng, std::size_t n, std::uint64_t horizon, const std::string& prefix) {
    std::vector<TritemporalEvent> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp vs = uniform(rng, 0, horizon - 1);
        TritemporalEvent r;
        r.lineage = prefix + std::to_string(i);
        r.id = r.lineage;
        r.valid = {vs, vs + Timestamp(uniform(rng, 1, 4))};
        r.occurrence = {vs, chance(rng, 0.2) ? vs + Timestamp(uniform(rng, 1, 10)) : kInfinity};
        r.arrival = {Timestamp(i + 1), kInfinity};
        r.payload = Payload{{"m", static_cast<std::int64_t>(uniform(rng, 0, 2))}};
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.occurrence.start < b.occurrence.start; });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].arrival = {Timestamp(i + 1), kInfinity};
    }
    return out;
}

inline UnitemporalTable lifetimesOf(const std::vector<TritemporalEvent>& rows) {
    UnitemporalTable out;
    for (const auto& r : rows) {
        out.push_back({r.id, r.occurrence, r.payload});
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline PatternStream eventsOf(const std::vector<TritemporalEvent>& rows) {
    PatternStream out;
    for (const auto& r : rows) {
        auto e = PatternEvent::primitive(r.id, r.valid, r.occurrence, r.payload);
        if (r.rootTime) {
            e.rootTime = *r.rootTime;
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// An operator result in the row shape the engine emits.
inline HistoryTable tableOf(const UnitemporalTable& t) {
    std::vector<TritemporalEvent> rows;
    for (const auto& e : t) {
        TritemporalEvent r;
        r.lineage = e.id;
        r.id = e.id;
        r.valid = e.valid;
        r.occurrence = e.valid;
        r.payload = e.payload;
        rows.push_back(std::move(r));
    }
    return HistoryTable(std::move(rows));
}

inline HistoryTable tableOf(const PatternStream& s) {
    std::vector<TritemporalEvent> rows;
    for (const auto& e : s) {
        TritemporalEvent r;
        r.lineage = e.id;
        r.id = e.id;
        r.valid = e.valid;
        r.occurrence = e.occurrence;
        r.rootTime = e.rootTime;
        r.contributors = e.contributors;
        r.payload = e.payload;
        rows.push_back(std::move(r));
    }
    return HistoryTable(std::move(rows));
}

struct PortItem {
    std::size_t port;
    jsonl::StreamItem item;
};

/// Random interleaving that keeps each port's order.
inline std::vector<PortItem> interleave(Rng& rng, const std::vector<std::vector<jsonl::StreamItem>>& ports) {
    std::vector<std::size_t> next(ports.size(), 0);
    std::vector<PortItem> out;
    while (true) {
        std::vector<std::size_t> open;
        for (std::size_t p = 0; p < ports.size(); ++p) {
            if (next[p] < ports[p].size()) {
                open.push_back(p);
            }
        }
        if (open.empty()) {
            return out;
        }
        const std::size_t p = open[uniform(rng, 0, open.size() - 1)];
        out.push_back({p, ports[p][next[p]++]});
    }
}

/// Feeds the items then finishes; returns the instance for inspection.
inline engine::OperatorInstance feed(std::unique_ptr<engine::OperatorModule> module,
                                     engine::ConsistencyLevel level,
                                     const std::vector<PortItem>& items) {
    engine::OperatorInstance op(std::move(module), level);
    for (const auto& [port, item] : items) {
        if (item.kind == jsonl::StreamItem::Kind::Row) {
            op.ingest(port, item.row);
        } else {
            op.declareGuarantee(port, item.guarantee);
        }
    }
    op.finish();
    return op;
}


struct StreamItemOf {
    std::string stream;
    jsonl::StreamItem item;
};

/**
 * Distinct valid start times over `streams`, one global arrival order with bounded
 * disorder, and after each arrival the tightest honest guarantee of every stream that
 * advanced (INFINITY once a stream has no rows left).
 */
inline std::vector<StreamItemOf> globalWorkload(Rng& rng,
                                                const std::vector<std::string>& streams,
                                                std::size_t perStream,
                                                std::size_t skew,
                                                double retractProb) {
    std::vector<std::uint64_t> starts(streams.size() * perStream);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        starts[i] = i;
    }
    std::shuffle(starts.begin(), starts.end(), rng);
    std::vector<TritemporalEvent> rows;
    std::map<std::string, std::string> streamOf;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        for (std::size_t i = 0; i < perStream; ++i) {
            const Timestamp vs = starts[s * perStream + i];
            TritemporalEvent r;
            r.lineage = streams[s] + "-" + std::to_string(i);
            r.id = r.lineage;
            r.valid = {vs, vs + Timestamp(1)};
            r.occurrence = {vs, kInfinity};
            r.payload = Payload{{"m", static_cast<std::int64_t>(uniform(rng, 0, 1))}};
            streamOf[r.lineage] = streams[s];
            rows.push_back(std::move(r));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.occurrence.start < b.occurrence.start; });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].arrival = {Timestamp(i + 1), kInfinity};
    }
    disorder::Options o;
    o.seed = rng();
    o.skew = skew;
    o.retractProb = retractProb;
    const auto arrived = disorder::rowsOf(disorder::apply(rows, o));
    const auto owner = [&](const std::string& lineage) { return streamOf.at(lineage.substr(0, lineage.find('~'))); };

    std::vector<Timestamp> sync(arrived.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arrived.size(); ++i) {
        sync[i] = seen.insert(arrived[i].lineage).second ? arrived[i].occurrence.start : arrived[i].occurrence.end;
    }
    std::map<std::string, std::optional<Timestamp>> declared;
    std::vector<StreamItemOf> out;
    for (std::size_t i = 0; i < arrived.size(); ++i) {
        out.push_back({owner(arrived[i].lineage), jsonl::StreamItem::ofRow(arrived[i])});
        for (const auto& s : streams) {
            Timestamp next = kInfinity;
            for (std::size_t j = i + 1; j < arrived.size(); ++j) {
                if (owner(arrived[j].lineage) == s) {
                    next = std::min(next, sync[j]);
                }
            }
            if (next == Timestamp::zero()) {
                continue;
            }
            const Timestamp g = next.isInfinite() ? kInfinity : next - Timestamp(1);
            auto& last = declared[s];
            if (!last || g > *last) {
                last = g;
                out.push_back({s, jsonl::StreamItem::ofGuarantee(g)});
            }
        }
    }
    return out;
}

inline void run(engine::Pipeline& pipeline, const std::vector<StreamItemOf>& items) {
    for (const auto& [stream, item] : items) {
        if (item.kind == jsonl::StreamItem::Kind::Row) {
            pipeline.ingest(stream, item.row);
        } else {
            pipeline.declareGuarantee({stream, item.guarantee});
        }
    }
    pipeline.finish();
}

}// namespace cedr::testing

#endif// CEDR_TESTS_SUPPORT_HPP_
