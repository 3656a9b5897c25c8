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

#include <cedr/disorder.hpp>
#include <cedr/error.hpp>
#include <cedr/temporal.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace cedr::disorder {

std::vector<TritemporalEvent> rowsOf(const std::vector<jsonl::StreamItem>& items) {
    std::vector<TritemporalEvent> out;
    for (const auto& item : items) {
        if (item.kind == jsonl::StreamItem::Kind::Row) {
            out.push_back(item.row);
        }
    }
    return out;
}

std::vector<jsonl::StreamItem> withGuarantees(const std::vector<TritemporalEvent>& rows) {
    std::vector<Timestamp> sync(rows.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sync[i] = seen.insert(rows[i].lineage).second ? rows[i].occurrence.start : rows[i].occurrence.end;
    }
    std::vector<Timestamp> minAfter(rows.size() + 1, kInfinity);
    for (std::size_t i = rows.size(); i-- > 0;) {
        minAfter[i] = std::min(minAfter[i + 1], sync[i]);
    }
    std::vector<jsonl::StreamItem> out;
    std::optional<Timestamp> last;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.push_back(jsonl::StreamItem::ofRow(rows[i]));
        const Timestamp next = minAfter[i + 1];
        if (next.isInfinite() || next == Timestamp::zero()) {
            continue;
        }
        const Timestamp g = next - Timestamp(1);
        if (!last || g > *last) {
            out.push_back(jsonl::StreamItem::ofGuarantee(g));
            last = g;
        }
    }
    return out;
}

std::vector<jsonl::StreamItem> apply(const std::vector<TritemporalEvent>& rows, const Options& options) {
    if (!(options.retractProb >= 0.0 && options.retractProb <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "retraction probability must lie in [0, 1]");
    }
    if (options.skew == 0 && options.retractProb == 0.0 && !options.guarantees) {
        std::vector<jsonl::StreamItem> out;
        for (const auto& r : rows) {
            out.push_back(jsonl::StreamItem::ofRow(r));
        }
        return out;
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::uint64_t> shift(1, 3);

    std::vector<TritemporalEvent> expanded;
    std::set<std::string> seen;
    std::uint64_t wrong = 0;
    for (const auto& r : rows) {
        const bool insertion = seen.insert(r.lineage).second;
        if (!insertion || r.isRemoval() || !(coin(rng) < options.retractProb)) {
            expanded.push_back(r);
            continue;
        }
        TritemporalEvent guess = r;
        guess.lineage = r.lineage + "~" + std::to_string(++wrong);
        guess.occurrence = {r.occurrence.start + Timestamp(shift(rng)), kInfinity};
        expanded.push_back(guess);
        guess.occurrence.end = guess.occurrence.start;
        expanded.push_back(guess);
        TritemporalEvent optimistic = r;
        optimistic.occurrence.end = kInfinity;
        expanded.push_back(optimistic);
        if (r.occurrence.end.isFinite()) {
            expanded.push_back(r);
        }
    }

    std::vector<std::pair<double, std::size_t>> keys;
    std::uniform_real_distribution<double> jitter(0.0, static_cast<double>(options.skew));
    for (std::size_t i = 0; i < expanded.size(); ++i) {
        keys.emplace_back(static_cast<double>(i) + (options.skew == 0 ? 0.0 : jitter(rng)), i);
    }
    std::stable_sort(keys.begin(), keys.end());

    std::map<std::string, std::vector<std::size_t>> slotsOf;
    std::map<std::string, std::vector<std::size_t>> rowsOfLineage;
    for (std::size_t pos = 0; pos < keys.size(); ++pos) {
        slotsOf[expanded[keys[pos].second].lineage].push_back(pos);
    }
    for (std::size_t i = 0; i < expanded.size(); ++i) {
        rowsOfLineage[expanded[i].lineage].push_back(i);
    }
    std::vector<TritemporalEvent> ordered(expanded.size());
    for (const auto& [lineage, slots] : slotsOf) {
        const auto& members = rowsOfLineage[lineage];
        for (std::size_t j = 0; j < slots.size(); ++j) {
            ordered[slots[j]] = expanded[members[j]];
        }
    }
    std::map<std::string, std::size_t> previous;
    for (std::size_t pos = 0; pos < ordered.size(); ++pos) {
        auto& row = ordered[pos];
        row.arrival = {Timestamp(pos + 1), kInfinity};
        if (auto it = previous.find(row.lineage); it != previous.end()) {
            ordered[it->second].arrival.end = row.arrival.start;
        }
        previous[row.lineage] = pos;
    }

    if (!logicallyEquivalent(HistoryTable(rows), HistoryTable(ordered), kInfinity, CanonicalMode::To)) {
        throw Error(ErrorKind::InvalidArgument, "re-encoded stream is not logically equivalent to its input");
    }
    if (options.guarantees) {
        return withGuarantees(ordered);
    }
    std::vector<jsonl::StreamItem> out;
    for (auto& r : ordered) {
        out.push_back(jsonl::StreamItem::ofRow(std::move(r)));
    }
    return out;
}

}// namespace cedr::disorder
