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
#include <cedr/temporal.hpp>

#include <algorithm>
#include <map>

namespace cedr {

HistoryTable reduce(const HistoryTable& table) {
    std::map<std::string, const TritemporalEvent*> best;
    for (const auto& row : table) {
        auto [it, inserted] = best.emplace(row.lineage, &row);
        if (inserted) {
            continue;
        }
        const TritemporalEvent& cur = *it->second;
        if (row.occurrence.end < cur.occurrence.end
            || (row.occurrence.end == cur.occurrence.end && row.arrival.start > cur.arrival.start)) {
            it->second = &row;
        }
    }
    std::vector<TritemporalEvent> out;
    out.reserve(best.size());
    for (const auto& [_, row] : best) {
        out.push_back(*row);
    }
    return HistoryTable(std::move(out));
}

HistoryTable truncate(const HistoryTable& table, Timestamp t0) {
    std::vector<TritemporalEvent> out;
    for (auto row : table) {
        if (row.occurrence.start > t0) {
            continue;
        }
        row.occurrence.end = std::min(row.occurrence.end, t0);
        if (row.occurrence.start >= row.occurrence.end) {
            continue;
        }
        out.push_back(std::move(row));
    }
    return HistoryTable(std::move(out));
}

HistoryTable canonicalTo(const HistoryTable& table, Timestamp t0) { return truncate(reduce(table), t0); }

HistoryTable canonicalAt(const HistoryTable& table, Timestamp t0) {
    std::vector<TritemporalEvent> live;
    for (const auto& row : reduce(table)) {
        if (row.occurrence.start <= t0 && t0 <= row.occurrence.end) {
            live.push_back(row);
        }
    }
    return truncate(HistoryTable(std::move(live)), t0);
}

std::vector<TritemporalEvent> shred(const std::vector<TritemporalEvent>& rows) {
    std::vector<TritemporalEvent> out;
    for (const auto& row : rows) {
        if (row.occurrence.end.isInfinite()) {
            throw Error(ErrorKind::InfiniteInterval, "cannot shred lineage " + row.lineage + " with occurrence end inf");
        }
        for (auto t = row.occurrence.start.ticks(); t < row.occurrence.end.ticks(); ++t) {
            TritemporalEvent piece = row;
            piece.occurrence = {t, t + 1};
            out.push_back(std::move(piece));
        }
    }
    return out;
}

AnnotatedHistoryTable annotateSync(const HistoryTable& table) {
    std::map<std::string, std::pair<Timestamp, int>> first;// lineage -> (min arrival, count at min)
    for (const auto& row : table) {
        auto [it, inserted] = first.emplace(row.lineage, std::pair{row.arrival.start, 1});
        if (inserted) {
            continue;
        }
        if (row.arrival.start < it->second.first) {
            it->second = {row.arrival.start, 1};
        } else if (row.arrival.start == it->second.first) {
            ++it->second.second;
        }
    }
    AnnotatedHistoryTable out;
    out.reserve(table.size());
    for (const auto& row : table) {
        const auto& [minArrival, count] = first.at(row.lineage);
        if (count > 1) {
            throw Error(ErrorKind::AmbiguousLineage,
                        "lineage " + row.lineage + " has " + std::to_string(count) + " rows arriving at " + minArrival.toString());
        }
        const bool insertion = row.arrival.start == minArrival;
        out.push_back({insertion ? row.occurrence.start : row.occurrence.end, row});
    }
    std::stable_sort(out.begin(), out.end(), [](const AnnotatedRow& a, const AnnotatedRow& b) {
        return a.event.arrival.start < b.event.arrival.start;
    });
    return out;
}

bool isSyncPoint(const AnnotatedHistoryTable& table, SyncPointPair point) {
    return std::all_of(table.begin(), table.end(), [&](const AnnotatedRow& row) {
        const bool past = row.event.arrival.start <= point.cedr && row.sync <= point.occurrence;
        const bool future = row.event.arrival.start > point.cedr && row.sync > point.occurrence;
        return past || future;
    });
}

std::vector<TritemporalEvent> logicalProjection(const HistoryTable& canonical) {
    std::vector<TritemporalEvent> out;
    out.reserve(canonical.size());
    for (auto row : canonical) {
        row.lineage.clear();
        row.arrival = {0, 0};
        out.push_back(std::move(row));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool logicallyEquivalent(const HistoryTable& a, const HistoryTable& b, Timestamp t0, CanonicalMode mode) {
    if (mode == CanonicalMode::At) {
        return logicalProjection(canonicalAt(a, t0)) == logicalProjection(canonicalAt(b, t0));
    }
    return logicalProjection(canonicalTo(a, t0)) == logicalProjection(canonicalTo(b, t0));
}

UnitemporalTable coalesceStar(const UnitemporalTable& table) {
    std::map<Payload, std::vector<const UnitemporalEvent*>> byPayload;
    for (const auto& e : table) {
        byPayload[e.payload].push_back(&e);
    }
    UnitemporalTable out;
    for (auto& [payload, rows] : byPayload) {
        std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return *a < *b; });
        UnitemporalEvent cur = *rows.front();
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i]->valid.start <= cur.valid.end) {
                cur.valid.end = std::max(cur.valid.end, rows[i]->valid.end);
                continue;
            }
            out.push_back(std::move(cur));
            cur = *rows[i];
        }
        out.push_back(std::move(cur));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool sameLifetimes(const UnitemporalTable& a, const UnitemporalTable& b) {
    auto key = [](const UnitemporalTable& t) {
        std::vector<std::pair<Interval, Payload>> k;
        k.reserve(t.size());
        for (const auto& e : t) {
            k.emplace_back(e.valid, e.payload);
        }
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end()), k.end());
        return k;
    };
    return key(a) == key(b);
}

}// namespace cedr
