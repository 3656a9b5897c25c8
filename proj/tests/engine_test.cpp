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

#include <cedr/error.hpp>
#include <cedr/plan.hpp>
#include <cedr/reference.hpp>

#include <gtest/gtest.h>

namespace cedr {
namespace {

using engine::ConsistencyLevel;
using engine::OperatorInstance;
using testing::Rng;
using testing::uniform;
namespace mod = engine::modules;

TritemporalEvent primitive(const std::string& id, std::uint64_t vs, Payload payload = {}) {
    TritemporalEvent r;
    r.lineage = id;
    r.id = id;
    r.valid = {vs, vs + 1};
    r.occurrence = {vs, kInfinity};
    r.payload = std::move(payload);
    return r;
}

TritemporalEvent lifetime(const std::string& id, std::uint64_t s, Timestamp e, Payload payload) {
    TritemporalEvent r;
    r.lineage = id;
    r.id = id;
    r.valid = {s, e};
    r.occurrence = {s, e};
    r.payload = std::move(payload);
    return r;
}

template<typename F>
void expectError(ErrorKind kind, F&& f) {
    try {
        f();
        ADD_FAILURE() << "no error thrown";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

TEST(ConsistencyLevelTest, Presets) {
    EXPECT_EQ(ConsistencyLevel::named("strong"), ConsistencyLevel::strong());
    EXPECT_EQ(ConsistencyLevel::named("middle"), (ConsistencyLevel{kInfinity, 0}));
    EXPECT_EQ(ConsistencyLevel::named("weak"), (ConsistencyLevel{0, 0}));
    expectError(ErrorKind::InvalidArgument, [] { ConsistencyLevel::named("eventual"); });
    expectError(ErrorKind::InvalidArgument, [] { ConsistencyLevel::of(2, 5); });
    EXPECT_EQ(ConsistencyLevel::of(5, 2), (ConsistencyLevel{5, 2}));
}

TEST(GuaranteeTest, IdentityAndMinimum) {
    OperatorInstance select(mod::select([](const Payload&) { return true; }), ConsistencyLevel::middle());
    EXPECT_EQ(select.declareGuarantee(0, 10).guarantee, Timestamp(10));

    OperatorInstance join(mod::join([](const Payload&, const Payload&) { return true; }), ConsistencyLevel::middle());
    EXPECT_FALSE(join.declareGuarantee(0, 10).guarantee);
    EXPECT_EQ(join.declareGuarantee(1, 7).guarantee, Timestamp(7));

    OperatorInstance seq(mod::sequence(2, 4), ConsistencyLevel::middle());
    seq.declareGuarantee(0, 10);
    EXPECT_EQ(seq.declareGuarantee(1, 10).guarantee, Timestamp(6));
}

TEST(GuaranteeTest, RegressionIsAnError) {
    OperatorInstance op(mod::select([](const Payload&) { return true; }), ConsistencyLevel::middle());
    op.declareGuarantee(0, 10);
    expectError(ErrorKind::NonMonotoneGuarantee, [&] { op.declareGuarantee(0, 8); });
}

TEST(EngineTest, StrongHidesDisorder) {
    const auto a = primitive("a", 2);
    const auto b = primitive("b", 4);
    OperatorInstance strong(mod::unless(5), ConsistencyLevel::strong());
    strong.ingest(0, a);
    strong.ingest(1, b);
    strong.finish();
    EXPECT_EQ(strong.metrics().retractionRows, 0u);
    EXPECT_TRUE(strong.output().empty());

    OperatorInstance middle(mod::unless(5), ConsistencyLevel::middle());
    const auto first = middle.ingest(0, a);
    ASSERT_EQ(first.rows.size(), 1u);
    const auto second = middle.ingest(1, b);
    ASSERT_EQ(second.rows.size(), 1u);
    EXPECT_EQ(second.rows[0].lineage, first.rows[0].lineage);
    EXPECT_TRUE(second.rows[0].isRemoval());
    EXPECT_GT(second.rows[0].arrival.start, first.rows[0].arrival.start);
    middle.finish();
    EXPECT_EQ(middle.metrics().retractionRows, 1u);
    EXPECT_TRUE(canonicalTo(HistoryTable(middle.output()), kInfinity).empty());
}

TEST(EngineTest, StrongMatchesOrderedRun) {
    const std::vector<TritemporalEvent> rows = {primitive("a", 1), primitive("b", 2), primitive("c", 3), primitive("d", 4)};
    OperatorInstance ordered(mod::any(1), ConsistencyLevel::strong());
    for (const auto& r : rows) {
        ordered.ingest(0, r);
    }
    ordered.finish();
    OperatorInstance shuffled(mod::any(1), ConsistencyLevel::strong());
    for (std::size_t i : {1, 0, 3, 2}) {
        shuffled.ingest(0, rows[i]);
    }
    shuffled.declareGuarantee(0, 4);
    shuffled.finish();
    EXPECT_TRUE(logicallyEquivalent(HistoryTable(ordered.output()), HistoryTable(shuffled.output()), kInfinity, CanonicalMode::To));
    EXPECT_EQ(shuffled.metrics().retractionRows, 0u);
    EXPECT_GT(shuffled.metrics().blockingTime, 0u);
}

TEST(EngineTest, LateRowBeyondMemoryIsDropped) {
    OperatorInstance weak(mod::any(1), ConsistencyLevel::weak());
    weak.ingest(0, primitive("a", 12));
    weak.declareGuarantee(0, 10);
    weak.ingest(0, primitive("late", 3));
    weak.finish();
    EXPECT_EQ(weak.metrics().droppedRows, 1u);
    const auto canonical = canonicalTo(HistoryTable(weak.output()), kInfinity);
    ASSERT_EQ(canonical.size(), 1u);
    EXPECT_EQ(canonical.begin()->valid.start, Timestamp(12));

    OperatorInstance middle(mod::any(1), ConsistencyLevel::middle());
    middle.ingest(0, primitive("a", 12));
    middle.declareGuarantee(0, 10);
    middle.ingest(0, primitive("late", 3));
    middle.finish();
    EXPECT_EQ(middle.metrics().droppedRows, 0u);
    EXPECT_EQ(canonicalTo(HistoryTable(middle.output()), kInfinity).size(), 2u);
}

TEST(EngineTest, RetractionOfUnitemporalRow) {
    OperatorInstance op(mod::select([](const Payload&) { return true; }), ConsistencyLevel::middle());
    op.ingest(0, lifetime("a", 1, kInfinity, Payload{{"p", 1}}));
    auto shrunk = lifetime("a", 1, 5, Payload{{"p", 1}});
    const auto out = op.ingest(0, shrunk);
    op.finish();
    const auto canonical = canonicalTo(HistoryTable(op.output()), kInfinity);
    ASSERT_EQ(canonical.size(), 1u);
    EXPECT_EQ(canonical.begin()->occurrence, (Interval{1, 5}));
    (void)out;
}

TEST(SyncPointTest, Examples) {
    EXPECT_TRUE(engine::syncPointsOf({}).empty());
    const HistoryTable ordered = {testing::row("a", 1, kInfinity, 1), testing::row("b", 2, kInfinity, 2), testing::row("c", 3, kInfinity, 3)};
    EXPECT_EQ(engine::syncPointsOf(annotateSync(ordered)).size(), 3u);
    const HistoryTable disordered = {testing::row("a", 1, kInfinity, 1), testing::row("c", 3, kInfinity, 2), testing::row("b", 2, kInfinity, 3)};
    const auto points = engine::syncPointsOf(annotateSync(disordered));
    EXPECT_TRUE(std::none_of(points.begin(), points.end(), [](const SyncPointPair& p) { return p.cedr == Timestamp(2); }));
}

/// Sync of each emitted row, by the first-row-is-insertion rule.
std::vector<Timestamp> syncOf(const std::vector<TritemporalEvent>& rows, std::set<std::string>& seen) {
    std::vector<Timestamp> out;
    for (const auto& r : rows) {
        out.push_back(seen.insert(r.lineage).second ? r.occurrence.start : r.occurrence.end);
    }
    return out;
}

TEST(EnginePropertyTest, GuaranteeSoundnessAndStrongSyncPoints) {
    auto cases = testing::runtimeOperatorCases();
    for (auto& c : testing::patternOperatorCases()) {
        cases.push_back(std::move(c));
    }
    Rng rng(51);
    for (const auto& c : cases) {
        for (int i = 0; i < 20; ++i) {
            const auto items = testing::randomEncoding(rng, c.inputs(rng));
            for (const auto& level : {ConsistencyLevel::strong(), ConsistencyLevel::middle(), ConsistencyLevel::weak(), ConsistencyLevel::of(8, 3)}) {
                OperatorInstance op(c.module(), level);
                std::optional<Timestamp> emitted;
                std::set<std::string> seen;
                const auto check = [&](const engine::StepOutput& step) {
                    for (Timestamp s : syncOf(step.rows, seen)) {
                        if (emitted) {
                            EXPECT_GT(s, *emitted) << c.name << " at " << level.toString();
                        }
                    }
                    if (step.guarantee) {
                        emitted = step.guarantee;
                    }
                };
                for (const auto& [port, item] : items) {
                    check(item.kind == jsonl::StreamItem::Kind::Row ? op.ingest(port, item.row) : op.declareGuarantee(port, item.guarantee));
                }
                check(op.finish());
                if (level == ConsistencyLevel::strong()) {
                    // Only lifetime ends closing once the guarantee passes them; nothing is withdrawn.
                    for (const auto& row : op.output()) {
                        EXPECT_FALSE(row.isRemoval()) << c.name;
                    }
                    const auto annotated = op.annotatedOutput();
                    const auto points = engine::syncPointsOf(annotated);
                    const std::set<SyncPointPair> pointSet(points.begin(), points.end());
                    for (const auto& row : annotated) {
                        EXPECT_TRUE(pointSet.contains({row.sync, row.event.arrival.start})) << c.name;
                    }
                }
            }
        }
    }
}

TEST(EnginePropertyTest, BoundedLevelsAgreeWithOracleWithoutDrops) {
    auto cases = testing::runtimeOperatorCases();
    for (auto& c : testing::patternOperatorCases()) {
        cases.push_back(std::move(c));
    }
    Rng rng(52);
    for (const auto& c : cases) {
        for (int i = 0; i < 20; ++i) {
            const auto inputs = c.inputs(rng);
            const auto expected = c.oracle(inputs);
            const auto items = testing::randomEncoding(rng, inputs);
            for (const auto& level : {ConsistencyLevel::of(12, 0), ConsistencyLevel::of(12, 4), ConsistencyLevel::of(6, 6)}) {
                const auto op = testing::feed(c.module(), level, items);
                EXPECT_EQ(op.metrics().droppedRows, 0u);
                EXPECT_TRUE(logicallyEquivalent(HistoryTable(op.output()), expected, kInfinity, CanonicalMode::To)) << c.name << " " << level.toString();
            }
        }
    }
}

TEST(SwitchLevelTest, Errors) {
    OperatorInstance op(mod::any(1), ConsistencyLevel::middle());
    op.ingest(0, primitive("a", 1));
    op.ingest(0, primitive("c", 5));
    op.ingest(0, primitive("b", 3));
    expectError(ErrorKind::NotASyncPoint, [&] { op.switchLevel(ConsistencyLevel::weak(), {Timestamp(4), op.clock()}); });
    const auto before = op.output().size();
    EXPECT_TRUE(op.switchLevel(ConsistencyLevel::middle(), {Timestamp(2), Timestamp(2)}).rows.empty());
    EXPECT_EQ(op.output().size(), before);
    EXPECT_EQ(op.level(), ConsistencyLevel::middle());
}

TEST(SwitchLevelTest, StrongToMiddleMatchesFreshRun) {
    OperatorInstance op(mod::any(1), ConsistencyLevel::strong());
    op.ingest(0, primitive("a", 1));
    op.declareGuarantee(0, 1);
    op.switchLevel(ConsistencyLevel::middle(), {Timestamp(1), op.clock()});
    EXPECT_EQ(op.level(), ConsistencyLevel::middle());
    op.ingest(0, primitive("b", 3));
    op.finish();
    OperatorInstance fresh(mod::any(1), ConsistencyLevel::middle());
    fresh.ingest(0, primitive("a", 1));
    fresh.declareGuarantee(0, 1);
    fresh.ingest(0, primitive("b", 3));
    fresh.finish();
    EXPECT_TRUE(logicallyEquivalent(HistoryTable(op.output()), HistoryTable(fresh.output()), kInfinity, CanonicalMode::To));
}

TEST(MetricsTest, OrderedInputHasNoRetractions) {
    Rng rng(53);
    const auto items = testing::globalWorkload(rng, {"A", "B", "C"}, 30, 0, 0.0);
    plan::Node root;
    root.kind = plan::NodeKind::Not;
    root.scope = 10;
    root.children = {plan::source("C", "c"), plan::source("A", "a"), plan::source("B", "b")};
    for (const auto& level : {ConsistencyLevel::strong(), ConsistencyLevel::middle(), ConsistencyLevel::weak()}) {
        engine::Pipeline p(root, level);
        testing::run(p, items);
        EXPECT_EQ(p.metrics().retractionRows, 0u);
        EXPECT_EQ(p.metrics().droppedRows, 0u);
        if (level.blocking == Timestamp::zero()) {
            EXPECT_EQ(p.metrics().blockingTime, 0u);
        }
    }
    const auto json = engine::Metrics{}.toJson();
    for (const char* key : {"blocking_time", "max_state_rows", "output_rows", "retraction_rows", "dropped_rows"}) {
        EXPECT_TRUE(json.contains(key)) << key;
    }
}

TEST(PipelineTest, MachineRestart) {
    const auto machine = [](const std::string& a, const std::string& b) {
        return plan::Comparison{plan::Operand::attr(a, "Machine_Id"), plan::CompareOp::Eq, plan::Operand::attr(b, "Machine_Id")};
    };
    plan::Node seq;
    seq.kind = plan::NodeKind::Sequence;
    seq.scope = 720;
    seq.children = {plan::source("INSTALL", "x"), plan::source("SHUTDOWN", "y")};
    plan::Node root;
    root.kind = plan::NodeKind::Unless;
    root.scope = 5;
    root.children = {seq, plan::source("RESTART", "z")};
    root = plan::injectPredicates(root, {machine("x", "y"), machine("x", "z")});

    const auto runWith = [&](bool restart, ConsistencyLevel level) {
        engine::Pipeline p(root, level);
        EXPECT_EQ(p.streams(), (std::set<std::string>{"INSTALL", "RESTART", "SHUTDOWN"}));
        p.ingest("INSTALL", primitive("i1", 10, Payload{{"Machine_Id", 4}}));
        p.ingest("SHUTDOWN", primitive("s1", 100, Payload{{"Machine_Id", 4}}));
        p.ingest("RESTART", primitive("r0", 101, Payload{{"Machine_Id", 9}}));
        if (restart) {
            p.ingest("RESTART", primitive("r1", 102, Payload{{"Machine_Id", 4}}));
        }
        p.finish();
        return canonicalTo(HistoryTable(p.output()), kInfinity);
    };
    for (const auto& level : {ConsistencyLevel::strong(), ConsistencyLevel::middle(), ConsistencyLevel::weak()}) {
        const auto fired = runWith(false, level);
        ASSERT_EQ(fired.size(), 1u) << level.toString();
        EXPECT_EQ(fired.begin()->valid.start, Timestamp(100));
        EXPECT_EQ(fired.begin()->payload.find("x.Machine_Id")->toString(), "4");
        EXPECT_TRUE(runWith(true, level).empty()) << level.toString();
    }
}

}// namespace
}// namespace cedr
