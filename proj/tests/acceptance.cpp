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

#include "operator_cases.hpp"
#include "support.hpp"

#include <cedr/algebra.hpp>
#include <cedr/pattern.hpp>
#include <cedr/query.hpp>
#include <cedr/reference.hpp>

#include <chrono>
#include <cstdio>
#include <functional>

namespace {

using namespace cedr;
using namespace cedr::testing;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int number;
    std::string title;
    double limitSeconds;
    std::function<Outcome()> run;
};

struct Tally {
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok && failures++ == 0) {
            first = what;
        }
    }

    Outcome outcome(const std::string& summary) const {
        Outcome o{failures == 0, summary + ", " + std::to_string(failures) + " of " + std::to_string(checks) + " checks failed"};
        if (!first.empty()) {
            o.detail += " (first: " + first + ")";
        }
        return o;
    }
};

HistoryTable revisedTable() { return {row("E0", 1, 5, 1, 3), row("E0", 1, 3, 3, kInfinity)}; }
HistoryTable originalTable() { return {row("E0", 1, kInfinity, 1, 2), row("E0", 1, 5, 2, kInfinity)}; }

bool sameKOC(const HistoryTable& t, const std::vector<std::array<Timestamp, 4>>& expected) {
    if (t.size() != expected.size()) {
        return false;
    }
    std::size_t i = 0;
    for (const auto& r : t) {
        const auto& e = expected[i++];
        if (r.lineage != "E0" || r.occurrence.start != e[0] || r.occurrence.end != e[1] || r.arrival.start != e[2] || r.arrival.end != e[3]) {
            return false;
        }
    }
    return true;
}

Outcome tableExamples() {
    Tally t;
    t.expect(sameKOC(reduce(revisedTable()), {{1, 3, 3, kInfinity}}), "reduction of the first table");
    t.expect(sameKOC(reduce(originalTable()), {{1, 5, 2, kInfinity}}), "reduction of the second table");
    t.expect(sameKOC(canonicalTo(revisedTable(), 3), {{1, 3, 3, kInfinity}}), "canonical form of the first table to 3");
    t.expect(sameKOC(canonicalTo(originalTable(), 3), {{1, 3, 2, kInfinity}}), "canonical form of the second table to 3");
    const HistoryTable annotated = {row("E0", 1, 10, 0, 7), row("E0", 1, 5, 7, 10)};
    const auto sync = annotateSync(annotated);
    t.expect(sync.size() == 2 && sync[0].sync == Timestamp(1) && sync[1].sync == Timestamp(5), "sync values 1 and 5");
    return t.outcome("reduction, truncation at 3 and sync annotation");
}

Outcome equivalences() {
    Tally t;
    t.expect(logicallyEquivalent(revisedTable(), originalTable(), 3, CanonicalMode::To), "equivalent to 3");
    t.expect(logicallyEquivalent(revisedTable(), originalTable(), 3, CanonicalMode::At), "equivalent at 3");
    t.expect(!logicallyEquivalent(revisedTable(), originalTable(), 5, CanonicalMode::To), "not equivalent to 5");
    return t.outcome("equivalent to 3 and at 3, different to 5");
}

Outcome wellBehaved() {
    constexpr int kTables = 200;
    constexpr int kEncodings = 5;
    const std::vector<engine::ConsistencyLevel> levels = {engine::ConsistencyLevel::strong(), engine::ConsistencyLevel::middle(),
                                                          engine::ConsistencyLevel::weak()};
    auto cases = runtimeOperatorCases();
    for (auto& c : patternOperatorCases()) {
        cases.push_back(std::move(c));
    }
    Tally t;
    Rng rng(20240601);
    for (const auto& c : cases) {
        for (int table = 0; table < kTables; ++table) {
            const auto inputs = c.inputs(rng);
            const HistoryTable expected = c.oracle(inputs);
            for (int e = 0; e < kEncodings; ++e) {
                const auto items = randomEncoding(rng, inputs);
                for (const auto& level : levels) {
                    const auto op = feed(c.module(), level, items);
                    t.expect(logicallyEquivalent(HistoryTable(op.output()), expected, kInfinity, CanonicalMode::To),
                             c.name + " table " + std::to_string(table) + " encoding " + std::to_string(e) + " at " + level.toString());
                }
            }
        }
    }
    return t.outcome(std::to_string(cases.size()) + " operators x " + std::to_string(kTables) + " tables x " + std::to_string(kEncodings)
                     + " encodings x 3 levels");
}

/// Same-payload rows never overlap or meet.
UnitemporalTable separatedLifetimes(Rng& rng, std::size_t n, const std::string& prefix) {
    UnitemporalTable out;
    std::size_t attempts = 0;
    while (out.size() < n && attempts++ < 20 * n) {
        const Timestamp s = uniform(rng, 0, 60);
        const Interval life{s, s + Timestamp(uniform(rng, 1, 10))};
        Payload p = smallPayload(rng);
        const bool clash = std::any_of(out.begin(), out.end(), [&](const UnitemporalEvent& e) {
            return e.payload == p && e.valid.start <= life.end && life.start <= e.valid.end;
        });
        if (!clash) {
            out.push_back({prefix + std::to_string(out.size()), life, std::move(p)});
        }
    }
    return out;
}

/// Cuts every lifetime at random interior points into pieces with fresh identifiers.
UnitemporalTable randomSplit(Rng& rng, const UnitemporalTable& table) {
    UnitemporalTable out;
    for (const auto& e : table) {
        Timestamp start = e.valid.start;
        std::size_t piece = 0;
        while (true) {
            const std::uint64_t room = (e.valid.end - start).ticks();
            if (room <= 1 || chance(rng, 0.4)) {
                out.push_back({e.id + "/" + std::to_string(piece), {start, e.valid.end}, e.payload});
                break;
            }
            const Timestamp cut = start + Timestamp(uniform(rng, 1, room - 1));
            out.push_back({e.id + "/" + std::to_string(piece++), {start, cut}, e.payload});
            start = cut;
        }
    }
    return out;
}

Outcome viewUpdateCompliance() {
    using algebra::Aggregate;
    constexpr int kPairs = 500;
    Rng rng(11);
    Tally t;
    const auto keepK = [](const Payload& p) { return Payload{{"k", *p.find("k")}}; };
    const auto bigV = [](const Payload& p) { return p.find("v")->asDouble() >= 2; };
    const auto sameK = [](const Payload& l, const Payload& r) { return *l.find("k") == *r.find("k"); };
    const std::vector<std::pair<std::string, std::function<UnitemporalTable(const UnitemporalTable&, const UnitemporalTable&)>>> ops = {
        {"project", [&](const auto& a, const auto&) { return algebra::project(a, keepK); }},
        {"select", [&](const auto& a, const auto&) { return algebra::select(a, bigV); }},
        {"join", [&](const auto& a, const auto& b) { return algebra::join(a, b, sameK); }},
        {"union", [](const auto& a, const auto& b) { return algebra::setUnion(a, b); }},
        {"difference", [](const auto& a, const auto& b) { return algebra::difference(a, b); }},
        {"groupby-aggregate", [](const auto& a, const auto&) { return algebra::groupbyAggregate(a, {"k"}, Aggregate::Sum, "v"); }},
    };
    std::size_t preconditionFailures = 0;
    for (const auto& [name, op] : ops) {
        for (int i = 0; i < kPairs; ++i) {
            const auto r1 = separatedLifetimes(rng, uniform(rng, 1, 12), "r");
            const auto r2 = separatedLifetimes(rng, uniform(rng, 1, 12), "q");
            const auto s1 = randomSplit(rng, r1);
            const auto s2 = randomSplit(rng, r2);
            if (!sameLifetimes(coalesceStar(r1), coalesceStar(s1)) || !sameLifetimes(coalesceStar(r2), coalesceStar(s2))) {
                ++preconditionFailures;
                continue;
            }
            t.expect(sameLifetimes(coalesceStar(op(r1, r2)), coalesceStar(op(s1, s2))), name + " pair " + std::to_string(i));
        }
    }
    t.expect(preconditionFailures == 0, "split inputs coalesce back to their source");
    const UnitemporalTable r = {{"r", {1, 5}, Payload{{"P", 1}}}};
    const UnitemporalTable s = {{"s1", {1, 3}, Payload{{"P", 1}}}, {"s2", {3, 5}, Payload{{"P", 1}}}};
    const algebra::LifetimeFunctions wl1{[](const UnitemporalEvent& e) { return e.valid.start; }, [](const UnitemporalEvent&) { return Timestamp(1); }};
    t.expect(sameLifetimes(coalesceStar(r), coalesceStar(s)), "counterexample inputs coalesce equally");
    t.expect(!sameLifetimes(coalesceStar(algebra::alterLifetime(r, wl1)), coalesceStar(algebra::alterLifetime(s, wl1))),
             "lifetime remapping separates the counterexample");
    return t.outcome("6 operators x " + std::to_string(kPairs) + " split pairs plus the lifetime remapping counterexample");
}

std::vector<PatternEvent> eventsAt(Rng& rng, std::size_t n, const std::string& prefix, std::uint64_t horizon) {
    std::vector<PatternEvent> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp vs = uniform(rng, 0, horizon);
        auto e = PatternEvent::primitive(prefix + std::to_string(i), {vs, vs + Timestamp(uniform(rng, 1, 3))}, {vs, kInfinity},
                                         Payload{{"m", static_cast<std::int64_t>(uniform(rng, 0, 1))}});
        e.rootTime = vs - Timestamp(uniform(rng, 0, 3));
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome patternOracle() {
    constexpr int kCases = 100;
    Rng rng(5);
    Tally t;
    const pattern::CompositeFilter noFilter;
    const auto sameM = [](const Payload& a, const Payload& b) {
        const Scalar* x = a.find("m");
        const Scalar* y = b.find("m");
        return x && y && *x == *y;
    };
    const pattern::CompositeFilter firstMZero = [](const Payload& p) {
        const Scalar* m = p.find("m");
        return m && *m == Scalar(0);
    };
    for (int c = 0; c < kCases; ++c) {
        const std::uint64_t w = uniform(rng, 1, 5);
        const std::uint64_t horizon = uniform(rng, 3, 12);
        const std::size_t k = uniform(rng, 2, 3);
        std::vector<PatternStream> in;
        std::size_t budget = 12;
        for (std::size_t p = 0; p < k; ++p) {
            const std::size_t n = uniform(rng, 0, std::min<std::size_t>(budget, 4));
            budget -= n;
            in.push_back(eventsAt(rng, n, "s" + std::to_string(p) + "e", horizon));
        }
        const auto blockers = eventsAt(rng, std::min<std::size_t>(budget, 3), "b", horizon);
        const auto filter = chance(rng, 0.3) ? firstMZero : noFilter;
        const std::string tag = "case " + std::to_string(c);
        for (std::size_t n = 1; n <= k; ++n) {
            t.expect(pattern::atleast(n, in, w, filter) == reference::atleast(n, in, w, filter), tag + " atleast");
            t.expect(pattern::atmost(n, in, w, filter) == reference::atmost(n, in, w, filter), tag + " atmost");
        }
        t.expect(pattern::sequence(in, w, filter) == reference::sequence(in, w, filter), tag + " sequence");
        t.expect(pattern::all(in, w, filter) == reference::all(in, w, filter), tag + " all");
        t.expect(pattern::any(in, filter) == reference::any(in, filter), tag + " any");
        t.expect(pattern::unless(in[0], blockers, w) == reference::unless(in[0], blockers, w), tag + " unless");
        t.expect(pattern::unless(in[0], blockers, w, sameM) == reference::unless(in[0], blockers, w, sameM), tag + " unless with predicate");
        t.expect(pattern::notSequence(blockers, in, w, filter) == reference::notSequence(blockers, in, w, filter), tag + " not");
        t.expect(pattern::notSequence(blockers, in, w, filter, sameM) == reference::notSequence(blockers, in, w, filter, sameM),
                 tag + " not with predicate");
        t.expect(pattern::cancelWhen(in[0], blockers) == reference::cancelWhen(in[0], blockers), tag + " cancel-when");
        t.expect(pattern::cancelWhen(in[0], blockers, sameM) == reference::cancelWhen(in[0], blockers, sameM), tag + " cancel-when with predicate");
    }

    const auto at = [](const std::string& id, std::uint64_t vs) {
        return PatternEvent::primitive(id, {vs, vs + 1}, {vs, kInfinity}, Payload{});
    };
    const std::vector<PatternStream> gapOfFive = {{at("a", 0)}, {at("b", 5)}};
    t.expect(pattern::sequence(gapOfFive, 5).size() == 1, "sequence spanning exactly w is kept");
    t.expect(pattern::sequence(gapOfFive, 4).empty(), "sequence spanning w + 1 is dropped");
    const std::vector<PatternStream> together = {{at("a", 3)}, {at("b", 3)}};
    t.expect(pattern::sequence(together, 5).empty(), "simultaneous starts do not form a sequence");
    t.expect(pattern::all(together, 5).empty(), "simultaneous starts do not satisfy ALL");
    t.expect(pattern::unless({at("a", 0)}, {at("z", 4)}, 4).size() == 1, "blocker exactly w later does not block");
    t.expect(pattern::unless({at("a", 0)}, {at("z", 0)}, 4).size() == 1, "simultaneous blocker does not block");
    t.expect(pattern::unless({at("a", 0)}, {at("z", 3)}, 4).empty(), "blocker inside the scope blocks");
    t.expect(pattern::notSequence({at("z", 5)}, gapOfFive, 5).size() == 1, "blocker at the last contributor does not block");
    return t.outcome(std::to_string(kCases) + " random cases of at most 12 events plus boundary cases, kernels against exhaustive enumeration");
}

/// Unitemporal rows carry valid = occurrence, so their valid end is only known up to t_o as well.
std::vector<TritemporalEvent> projected(const HistoryTable& canonical, bool unitemporal) {
    auto rows = logicalProjection(canonical);
    if (unitemporal) {
        for (auto& r : rows) {
            r.valid = r.occurrence;
        }
        std::sort(rows.begin(), rows.end());
    }
    return rows;
}

std::map<Timestamp, std::vector<Timestamp>> syncTimes(const AnnotatedHistoryTable& table) {
    std::map<Timestamp, std::vector<Timestamp>> out;
    for (const auto& p : engine::syncPointsOf(table)) {
        out[p.occurrence].push_back(p.cedr);
    }
    return out;
}

Outcome levelAgreement() {
    constexpr int kWorkloads = 100;
    auto cases = runtimeOperatorCases();
    for (auto& c : patternOperatorCases()) {
        cases.push_back(std::move(c));
    }
    const std::vector<engine::ConsistencyLevel> levels = {engine::ConsistencyLevel::strong(), engine::ConsistencyLevel::middle(),
                                                          engine::ConsistencyLevel::weak()};
    Rng rng(606);
    Tally t;
    std::size_t common = 0;
    std::size_t switches = 0;
    for (int w = 0; w < kWorkloads; ++w) {
        const auto& c = cases[static_cast<std::size_t>(w) % cases.size()];
        const auto inputs = c.inputs(rng);
        const auto items = randomEncoding(rng, inputs);
        const bool unitemporal = c.module()->unitemporal();
        std::vector<engine::OperatorInstance> runs;
        for (const auto& level : levels) {
            runs.push_back(feed(c.module(), level, items));
        }
        std::vector<std::map<Timestamp, std::vector<Timestamp>>> points;
        for (const auto& r : runs) {
            points.push_back(syncTimes(r.annotatedOutput()));
        }
        for (const auto& [to, strongTimes] : points[0]) {
            if (!points[1].contains(to) || !points[2].contains(to)) {
                continue;
            }
            ++common;
            std::optional<std::vector<TritemporalEvent>> reference;
            for (std::size_t l = 0; l < runs.size(); ++l) {
                for (const auto& cedr : points[l].at(to)) {
                    const auto view = projected(canonicalAt(engine::prefix(runs[l].output(), cedr), to), unitemporal);
                    if (!reference) {
                        reference = view;
                    }
                    t.expect(view == *reference, c.name + " workload " + std::to_string(w) + " at " + to.toString() + " under " + levels[l].toString());
                }
            }
        }

        const std::size_t cut = items.size() / 2;
        for (const auto& [from, to] : {std::pair{engine::ConsistencyLevel::strong(), engine::ConsistencyLevel::middle()},
                                       std::pair{engine::ConsistencyLevel::middle(), engine::ConsistencyLevel::weak()}}) {
            engine::OperatorInstance op(c.module(), from);
            for (std::size_t i = 0; i < cut; ++i) {
                const auto& [port, item] = items[i];
                item.kind == jsonl::StreamItem::Kind::Row ? op.ingest(port, item.row) : op.declareGuarantee(port, item.guarantee);
            }
            Timestamp latest = Timestamp::zero();
            for (const auto& r : op.annotatedInput()) {
                latest = std::max(latest, r.sync);
            }
            for (const auto& r : op.annotatedOutput()) {
                latest = std::max(latest, r.sync);
            }
            op.switchLevel(to, {latest, op.clock()});
            ++switches;
            for (std::size_t i = cut; i < items.size(); ++i) {
                const auto& [port, item] = items[i];
                item.kind == jsonl::StreamItem::Kind::Row ? op.ingest(port, item.row) : op.declareGuarantee(port, item.guarantee);
            }
            op.finish();
            const auto scratch = feed(c.module(), to, items);
            t.expect(logicallyEquivalent(HistoryTable(op.output()), HistoryTable(scratch.output()), kInfinity, CanonicalMode::To),
                     c.name + " workload " + std::to_string(w) + " switched to " + to.toString());
            const auto switched = syncTimes(op.annotatedOutput());
            const auto fresh = syncTimes(scratch.annotatedOutput());
            for (const auto& [to2, times] : switched) {
                if (to2 <= latest || !fresh.contains(to2)) {
                    continue;
                }
                t.expect(projected(canonicalAt(engine::prefix(op.output(), times.front()), to2), unitemporal)
                             == projected(canonicalAt(engine::prefix(scratch.output(), fresh.at(to2).front()), to2), unitemporal),
                         c.name + " workload " + std::to_string(w) + " after switching, at " + to2.toString());
            }
        }
    }
    t.expect(common > 0, "some common sync points exist");
    return t.outcome(std::to_string(kWorkloads) + " workloads, " + std::to_string(common) + " common sync points, " + std::to_string(switches)
                     + " level switches");
}

plan::Node notSequencePlan(Timestamp scope) {
    plan::Node n;
    n.kind = plan::NodeKind::Not;
    n.scope = scope;
    n.children = {plan::source("C", "c"), plan::source("A", "a"), plan::source("B", "b")};
    return n;
}

/// Rows without CEDR time, in emission order.
std::vector<TritemporalEvent> withoutArrival(std::vector<TritemporalEvent> rows) {
    for (auto& r : rows) {
        r.arrival = {};
    }
    return rows;
}

Outcome tradeoffs() {
    Tally t;
    const plan::Node plan = notSequencePlan(10);
    const std::vector<std::string> streams = {"A", "B", "C"};
    const auto measure = [&](const std::vector<StreamItemOf>& items) {
        std::vector<engine::Pipeline> runs;
        for (const auto& level : {engine::ConsistencyLevel::strong(), engine::ConsistencyLevel::middle(), engine::ConsistencyLevel::weak()}) {
            engine::Pipeline p(plan, level);
            run(p, items);
            runs.push_back(std::move(p));
        }
        return runs;
    };

    Rng rng(2007);
    const auto disordered = measure(globalWorkload(rng, streams, 100, 20, 0.05));
    const auto s = disordered[0].metrics();
    const auto m = disordered[1].metrics();
    const auto w = disordered[2].metrics();
    t.expect(s.blockingTime > 0, "strong blocks");
    t.expect(m.blockingTime == 0 && w.blockingTime == 0, "middle and weak never block");
    t.expect(m.retractionRows > 0, "middle retracts");
    t.expect(w.outputRows <= m.outputRows, "weak output no larger than middle");
    t.expect(w.maxStateRows <= m.maxStateRows, "weak state no larger than middle");

    const auto ordered = measure(globalWorkload(rng, streams, 100, 0, 0.0));
    const auto base = withoutArrival(ordered[1].output());
    for (std::size_t l = 0; l < ordered.size(); ++l) {
        t.expect(withoutArrival(ordered[l].output()) == base, "ordered outputs identical at level " + std::to_string(l));
        t.expect(ordered[l].metrics().retractionRows == 0, "ordered outputs carry no retractions at level " + std::to_string(l));
    }
    t.expect(!base.empty(), "ordered run produces output");
    char buf[256];
    std::snprintf(buf, sizeof buf, "skew 20: blocking %llu/%llu/%llu, retractions %llu/%llu/%llu, output %llu/%llu/%llu, state %llu/%llu/%llu",
                  static_cast<unsigned long long>(s.blockingTime), static_cast<unsigned long long>(m.blockingTime),
                  static_cast<unsigned long long>(w.blockingTime), static_cast<unsigned long long>(s.retractionRows),
                  static_cast<unsigned long long>(m.retractionRows), static_cast<unsigned long long>(w.retractionRows),
                  static_cast<unsigned long long>(s.outputRows), static_cast<unsigned long long>(m.outputRows),
                  static_cast<unsigned long long>(w.outputRows), static_cast<unsigned long long>(s.maxStateRows),
                  static_cast<unsigned long long>(m.maxStateRows), static_cast<unsigned long long>(w.maxStateRows));
    return t.outcome(std::string(buf) + " (strong/middle/weak); skew 0 identical");
}

constexpr const char* kMachineRestart = R"(EVENT Machine_Restart
WHEN UNLESS(SEQUENCE(INSTALL x,
                      SHUTDOWN AS y, 12 hours),
            RESTART AS z, 5 minutes)
WHERE {x.Machine_Id = y.Machine_Id} AND
      {x.Machine_Id = z.Machine_Id}
)";

Outcome language() {
    Tally t;
    const auto parsed = query::parse(kMachineRestart);
    t.expect(parsed.ok(), "the example parses");
    if (!parsed.ok()) {
        return t.outcome(parsed.diagnostics.empty() ? "no diagnostics" : parsed.diagnostics.front().toString());
    }
    const auto leaf = [](std::string type, std::string var) {
        query::Expr e;
        e.name = std::move(type);
        e.binding = std::move(var);
        return e;
    };
    query::Expr seq;
    seq.kind = query::Expr::Kind::Call;
    seq.name = "SEQUENCE";
    seq.args = {leaf("INSTALL", "x"), leaf("SHUTDOWN", "y")};
    seq.scope = query::Duration{12, query::TimeUnit::Hours};
    query::Expr unless;
    unless.kind = query::Expr::Kind::Call;
    unless.name = "UNLESS";
    unless.args = {seq, leaf("RESTART", "z")};
    unless.scope = query::Duration{5, query::TimeUnit::Minutes};
    const auto eq = [](const std::string& a, const std::string& b) {
        query::Predicate p;
        p.lhs.variable = a;
        p.lhs.attribute = "Machine_Id";
        p.rhs.variable = b;
        p.rhs.attribute = "Machine_Id";
        return p;
    };
    query::Query expected;
    expected.name = "Machine_Restart";
    expected.when = unless;
    expected.where = {eq("x", "y"), eq("x", "z")};
    t.expect(*parsed.query == expected, "syntax tree");

    const auto reparsed = query::parse(query::prettyPrint(*parsed.query));
    t.expect(reparsed.ok() && *reparsed.query == *parsed.query, "pretty-printed text parses back to the same tree");

    const auto machine = [](const std::string& a, const std::string& b) {
        return plan::Comparison{plan::Operand::attr(a, "Machine_Id"), plan::CompareOp::Eq, plan::Operand::attr(b, "Machine_Id")};
    };
    plan::Node sequenceNode;
    sequenceNode.kind = plan::NodeKind::Sequence;
    sequenceNode.scope = 720;
    sequenceNode.filters = {machine("x", "y")};
    sequenceNode.children = {plan::source("INSTALL", "x"), plan::source("SHUTDOWN", "y")};
    plan::Node unlessNode;
    unlessNode.kind = plan::NodeKind::Unless;
    unlessNode.scope = 5;
    unlessNode.blockPredicates = {machine("x", "z")};
    unlessNode.children = {sequenceNode, plan::source("RESTART", "z")};
    const auto compiled = query::compile(*parsed.query, {60});
    t.expect(compiled == unlessNode, "plan at one tick per minute: " + plan::toJson(compiled).dump());
    t.expect(plan::toJson(compiled).dump() == plan::toJson(query::compile(*parsed.query, {60})).dump(), "compilation is deterministic");

    Rng rng(99);
    std::size_t rejected = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string text;
        if (i % 2 == 0) {
            const std::size_t n = uniform(rng, 0, 200);
            for (std::size_t j = 0; j < n; ++j) {
                text.push_back(static_cast<char>(uniform(rng, 0, 255)));
            }
        } else {
            text = kMachineRestart;
            const std::size_t edits = uniform(rng, 1, 6);
            for (std::size_t j = 0; j < edits; ++j) {
                text[uniform(rng, 0, text.size() - 1)] = static_cast<char>(uniform(rng, 0, 255));
            }
        }
        try {
            const auto r = query::parse(text);
            rejected += r.ok() ? 0 : 1;
            t.expect(r.ok() || !r.diagnostics.empty(), "rejected input carries a diagnostic");
        } catch (...) {
            t.expect(false, "parser threw on fuzz input " + std::to_string(i));
        }
    }
    return t.outcome("example tree, round trip and plan; 10000 fuzz inputs (" + std::to_string(rejected) + " rejected with diagnostics)");
}

}// namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "table reproduction", 1.0, tableExamples},
        {2, "equivalence to and at a time", 1.0, equivalences},
        {3, "well-behavedness over random disorder and retraction encodings", 180.0, wellBehaved},
        {4, "view-update compliance", 60.0, viewUpdateCompliance},
        {5, "pattern operators against exhaustive enumeration", 60.0, patternOracle},
        {6, "agreement across consistency levels", 120.0, levelAgreement},
        {7, "directional metrics across consistency levels", 60.0, tradeoffs},
        {8, "language round trip", 60.0, language},
    };
    bool all = true;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && seconds < c.limitSeconds;
        all = all && pass;
        std::printf("criterion %d: %s - %s; %s (%.2fs, limit %.0fs)\n", c.number, pass ? "PASS" : "FAIL", c.title.c_str(), o.detail.c_str(), seconds,
                    c.limitSeconds);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
