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

#ifndef CEDR_ENGINE_HPP_
#define CEDR_ENGINE_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <cedr/algebra.hpp>
#include <cedr/events.hpp>
#include <cedr/pattern.hpp>
#include <cedr/plan.hpp>

namespace cedr::engine {

/// A point (M, B) of the consistency spectrum, both in occurrence-time ticks.
struct ConsistencyLevel {
    Timestamp memory = kInfinity;
    Timestamp blocking = kInfinity;

    static ConsistencyLevel strong() { return {kInfinity, kInfinity}; }
    static ConsistencyLevel middle() { return {kInfinity, Timestamp::zero()}; }
    static ConsistencyLevel weak() { return {Timestamp::zero(), Timestamp::zero()}; }
    /// Throws Error(InvalidArgument) when blocking > memory.
    static ConsistencyLevel of(Timestamp memory, Timestamp blocking);
    /// "strong", "middle" or "weak"; throws Error(InvalidArgument) otherwise.
    static ConsistencyLevel named(const std::string& name);

    std::string toString() const;
    bool operator==(const ConsistencyLevel&) const = default;
};

/// No future row on `stream` will carry Sync <= threshold.
struct Guarantee {
    std::string stream;
    Timestamp threshold;
};

struct Metrics {
    std::uint64_t blockingTime = 0;
    std::uint64_t maxStateRows = 0;
    std::uint64_t outputRows = 0;
    std::uint64_t retractionRows = 0;
    std::uint64_t droppedRows = 0;

    nlohmann::ordered_json toJson() const;
    bool operator==(const Metrics&) const = default;
};

/// Rows emitted by one step, then the new output guarantee if it advanced.
struct StepOutput {
    std::vector<TritemporalEvent> rows;
    std::optional<Timestamp> guarantee;
};

/// An output row of a module together with the input identifiers it was built from.
struct Produced {
    PatternEvent event;
    std::vector<std::string> sources;
};

/**
 * @brief The operational half of an operator: a pure function from current input
 * contents to output contents, plus the timing facts the monitor needs.
 *
 * Unitemporal modules read and write lifetimes through the occurrence interval.
 */
class OperatorModule {
  public:
    virtual ~OperatorModule() = default;

    virtual std::string name() const = 0;
    virtual std::size_t arity() const = 0;
    virtual std::vector<Produced> evaluate(std::span<const PatternStream> inputs) const = 0;

    /// Output with Sync t is final once every input is complete up to t + lookahead().
    virtual Timestamp lookahead() const { return Timestamp::zero(); }
    /// Rows of `port` with V_s + backreach <= horizon can no longer change any output.
    virtual Timestamp backreach(std::size_t /*port*/) const { return Timestamp::zero(); }
    virtual bool unitemporal() const { return false; }
    /// Output rows are maximal same-payload lifetimes named by algebra::snapshotId.
    virtual bool coalescing() const { return false; }
};

namespace modules {
using Module = std::unique_ptr<OperatorModule>;

Module project(algebra::PayloadMap f);
Module select(algebra::PayloadPredicate f);
Module join(algebra::JoinPredicate theta);
Module setUnion();
Module difference();
Module groupbyAggregate(std::vector<std::string> keys, algebra::Aggregate agg, std::string target, std::string outputName = {});
Module alterLifetime(algebra::LifetimeFunctions fns, Timestamp lookahead = Timestamp::zero());
Module window(Timestamp length);
Module hoppingWindow(Timestamp period);
Module inserts();
Module deletes();

Module atleast(std::size_t n, std::size_t k, Timestamp scope, pattern::CompositeFilter filter = {});
Module sequence(std::size_t k, Timestamp scope, pattern::CompositeFilter filter = {});
Module all(std::size_t k, Timestamp scope, pattern::CompositeFilter filter = {});
Module any(std::size_t k, pattern::CompositeFilter filter = {});
Module atmost(std::size_t n, std::size_t k, Timestamp scope, pattern::CompositeFilter filter = {});
/// Ports: [E1, E2].
Module unless(Timestamp scope, pattern::BlockPredicate block = {}, pattern::CompositeFilter filter = {});
/// Ports: [E, E1 .. Ek].
Module notSequence(std::size_t k, Timestamp scope, pattern::CompositeFilter filter = {}, pattern::BlockPredicate block = {});
/// Ports: [E1, E2].
Module cancelWhen(pattern::BlockPredicate block = {}, pattern::CompositeFilter filter = {});

/// Binds a primitive stream: payload keys become `variable.attribute`, root time = V_s.
Module bind(std::string variable);
Module filterEvents(pattern::CompositeFilter filter);
Module projectEvents(std::vector<std::string> keys);
Module slice(std::optional<Interval> occurrence, std::optional<Interval> valid);

/// The module running one plan node (children are separate instances).
Module forNode(const plan::Node& node);
}// namespace modules

/**
 * @brief Consistency monitor wrapped around one operational module.
 *
 * Every arrival and every emitted Sync group advances the instance clock by one tick; an
 * arriving row's C_s is the clock value at arrival. The first row seen for a lineage is
 * its insertion (Sync = O_s), later rows are retractions (Sync = O_e).
 *
 * Rows wait in a per-port alignment buffer until Sync <= frontier (minimum guarantee over
 * ports) or, for finite B, until a row with Sync >= its Sync + B has arrived on the port.
 * Released rows update the operator state; the output the module computes from that state
 * is then reconciled with what was already emitted: shrunk occurrence ends become
 * retractions, vanished or grown rows are removed (O_e = O_s) and re-inserted under a
 * fresh lineage key. Ends beyond the output guarantee are emitted open (infinite) and
 * closed once the guarantee passes them. With B infinite only rows at or below the output
 * guarantee are emitted.
 *
 * With finite M, rows whose Sync is at least M behind the frontier are dropped, and
 * state that can no longer affect output past frontier - M is discarded.
 */
class OperatorInstance {
  public:
    OperatorInstance(std::unique_ptr<OperatorModule> module, ConsistencyLevel level, std::string name = "out");
    ~OperatorInstance();
    OperatorInstance(OperatorInstance&&) noexcept;
    OperatorInstance& operator=(OperatorInstance&&) noexcept;

    StepOutput ingest(std::size_t port, TritemporalEvent row);
    /// Throws Error(NonMonotoneGuarantee) when the threshold decreases.
    StepOutput declareGuarantee(std::size_t port, Timestamp threshold);
    /// Guarantee INFINITY on every port.
    StepOutput finish();
    /// Throws Error(NotASyncPoint) unless `at` is a sync point of both the input and output tables.
    StepOutput switchLevel(ConsistencyLevel level, SyncPointPair at);

    const ConsistencyLevel& level() const;
    const OperatorModule& module() const;
    Timestamp clock() const;
    std::optional<Timestamp> outputGuarantee() const;
    /// Every row emitted so far; C_e is closed when a later row of the lineage is emitted.
    const std::vector<TritemporalEvent>& output() const;
    /// Input rows as received (lineage keys prefixed by port), with their Sync values.
    const AnnotatedHistoryTable& annotatedInput() const;
    AnnotatedHistoryTable annotatedOutput() const;
    const Metrics& metrics() const;
    std::size_t stateRows() const;

  private:
    struct State;
    std::unique_ptr<State> state_;
};

/// All (Sync, C_s) pairs of the table's rows that are sync points of the table.
std::vector<SyncPointPair> syncPointsOf(const AnnotatedHistoryTable& table);

/// Rows of `table` with C_s <= cedrTime.
HistoryTable prefix(const std::vector<TritemporalEvent>& table, Timestamp cedrTime);

/**
 * @brief A tree of operator instances built from a plan; sources feed on named streams.
 */
class Pipeline {
  public:
    Pipeline(const plan::Node& root, ConsistencyLevel level);
    ~Pipeline();
    Pipeline(Pipeline&&) noexcept;
    Pipeline& operator=(Pipeline&&) noexcept;

    std::set<std::string> streams() const;
    /// Output rows of the root emitted while processing this call.
    std::vector<TritemporalEvent> ingest(const std::string& stream, TritemporalEvent row);
    std::vector<TritemporalEvent> declareGuarantee(const Guarantee& g);
    std::vector<TritemporalEvent> finish();
    std::vector<TritemporalEvent> switchLevel(ConsistencyLevel level, SyncPointPair at);

    const std::vector<TritemporalEvent>& output() const;
    AnnotatedHistoryTable annotatedOutput() const;
    /// Guarantees emitted by the root, in order.
    const std::vector<Timestamp>& outputGuarantees() const;
    /// Blocking, state and drops summed over all instances; output counts from the root.
    Metrics metrics() const;
    const OperatorInstance& root() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}// namespace cedr::engine

#endif// CEDR_ENGINE_HPP_
