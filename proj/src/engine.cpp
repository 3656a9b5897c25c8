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

#include <cedr/engine.hpp>
#include <cedr/error.hpp>
#include <cedr/temporal.hpp>

#include <algorithm>
#include <functional>
#include <unordered_set>

namespace cedr::engine {

ConsistencyLevel ConsistencyLevel::of(Timestamp memory, Timestamp blocking) {
    if (blocking > memory) {
        throw Error(ErrorKind::InvalidArgument, "blocking limit " + blocking.toString() + " exceeds memory limit " + memory.toString());
    }
    return {memory, blocking};
}

ConsistencyLevel ConsistencyLevel::named(const std::string& name) {
    if (name == "strong") {
        return strong();
    }
    if (name == "middle") {
        return middle();
    }
    if (name == "weak") {
        return weak();
    }
    throw Error(ErrorKind::InvalidArgument, "unknown consistency level '" + name + "' (expected strong, middle or weak)");
}

std::string ConsistencyLevel::toString() const {
    if (*this == strong()) {
        return "strong";
    }
    if (*this == middle()) {
        return "middle";
    }
    if (*this == weak()) {
        return "weak";
    }
    return "(M=" + memory.toString() + ", B=" + blocking.toString() + ")";
}

nlohmann::ordered_json Metrics::toJson() const {
    nlohmann::ordered_json j;
    j["blocking_time"] = blockingTime;
    j["max_state_rows"] = maxStateRows;
    j["output_rows"] = outputRows;
    j["retraction_rows"] = retractionRows;
    j["dropped_rows"] = droppedRows;
    return j;
}

namespace {

/// Inverse of idgen.
std::vector<std::string> splitIds(const std::string& id) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < id.size()) {
        const auto colon = id.find(':', pos);
        if (colon == std::string::npos) {
            return {id};
        }
        const auto length = std::stoull(id.substr(pos, colon - pos));
        out.push_back(id.substr(colon + 1, length));
        pos = colon + 1 + length;
    }
    return out;
}

UnitemporalTable lifetimes(const PatternStream& events) {
    UnitemporalTable out;
    out.reserve(events.size());
    for (const auto& e : events) {
        out.push_back({e.id, e.occurrence, e.payload});
    }
    return out;
}

PatternEvent fromLifetime(const UnitemporalEvent& e) { return {e.id, e.valid, e.valid, e.valid.start, {}, e.payload}; }

enum class Lineage { Self, Pair, None };

class UnitemporalModule final : public OperatorModule {
  public:
    using Op = std::function<UnitemporalTable(std::span<const UnitemporalTable>)>;

    UnitemporalModule(std::string name, std::size_t arity, Op op, Lineage lineage, bool coalescing, Timestamp lookahead = Timestamp::zero())
        : name_(std::move(name)), arity_(arity), op_(std::move(op)), lineage_(lineage), coalescing_(coalescing), lookahead_(lookahead) {}

    std::string name() const override { return name_; }
    std::size_t arity() const override { return arity_; }
    bool unitemporal() const override { return true; }
    bool coalescing() const override { return coalescing_; }
    Timestamp lookahead() const override { return lookahead_; }

    std::vector<Produced> evaluate(std::span<const PatternStream> inputs) const override {
        std::vector<UnitemporalTable> tables;
        tables.reserve(inputs.size());
        for (const auto& s : inputs) {
            tables.push_back(lifetimes(s));
        }
        std::vector<Produced> out;
        for (const auto& e : op_(tables)) {
            Produced p{fromLifetime(e), {}};
            if (lineage_ == Lineage::Self) {
                p.sources = {e.id};
            } else if (lineage_ == Lineage::Pair) {
                p.sources = splitIds(e.id);
            }
            out.push_back(std::move(p));
        }
        return out;
    }

  private:
    std::string name_;
    std::size_t arity_;
    Op op_;
    Lineage lineage_;
    bool coalescing_;
    Timestamp lookahead_;
};

class PatternModule final : public OperatorModule {
  public:
    using Op = std::function<PatternStream(std::span<const PatternStream>)>;

    PatternModule(std::string name, std::size_t arity, Op op, bool passthrough, Timestamp lookahead, std::vector<Timestamp> backreach)
        : name_(std::move(name)), arity_(arity), op_(std::move(op)), passthrough_(passthrough), lookahead_(lookahead),
          backreach_(std::move(backreach)) {}

    std::string name() const override { return name_; }
    std::size_t arity() const override { return arity_; }
    Timestamp lookahead() const override { return lookahead_; }
    Timestamp backreach(std::size_t port) const override {
        return port < backreach_.size() ? backreach_[port] : (backreach_.empty() ? Timestamp::zero() : backreach_.back());
    }

    std::vector<Produced> evaluate(std::span<const PatternStream> inputs) const override {
        std::vector<Produced> out;
        for (auto& e : op_(inputs)) {
            std::vector<std::string> sources = passthrough_ ? std::vector<std::string>{e.id} : e.contributors;
            out.push_back({std::move(e), std::move(sources)});
        }
        return out;
    }

  private:
    std::string name_;
    std::size_t arity_;
    Op op_;
    bool passthrough_;
    Timestamp lookahead_;
    std::vector<Timestamp> backreach_;
};

PatternStream filteredStream(PatternStream events, const pattern::CompositeFilter& filter) {
    if (filter) {
        std::erase_if(events, [&](const PatternEvent& e) { return !filter(e.payload); });
    }
    return events;
}

}// namespace

namespace modules {

Module project(algebra::PayloadMap f) {
    return std::make_unique<UnitemporalModule>(
        "project", 1, [f = std::move(f)](std::span<const UnitemporalTable> in) { return algebra::project(in[0], f); }, Lineage::Self, false);
}

Module select(algebra::PayloadPredicate f) {
    return std::make_unique<UnitemporalModule>(
        "select", 1, [f = std::move(f)](std::span<const UnitemporalTable> in) { return algebra::select(in[0], f); }, Lineage::Self, false);
}

Module join(algebra::JoinPredicate theta) {
    return std::make_unique<UnitemporalModule>(
        "join", 2, [theta = std::move(theta)](std::span<const UnitemporalTable> in) { return algebra::join(in[0], in[1], theta); },
        Lineage::Pair, false);
}

Module setUnion() {
    return std::make_unique<UnitemporalModule>(
        "union", 2, [](std::span<const UnitemporalTable> in) { return algebra::setUnion(in[0], in[1]); }, Lineage::None, true);
}

Module difference() {
    return std::make_unique<UnitemporalModule>(
        "difference", 2, [](std::span<const UnitemporalTable> in) { return algebra::difference(in[0], in[1]); }, Lineage::None, true);
}

Module groupbyAggregate(std::vector<std::string> keys, algebra::Aggregate agg, std::string target, std::string outputName) {
    return std::make_unique<UnitemporalModule>(
        "groupby",
        1,
        [keys = std::move(keys), agg, target = std::move(target), outputName = std::move(outputName)](std::span<const UnitemporalTable> in) {
            return algebra::groupbyAggregate(in[0], keys, agg, target, outputName);
        },
        Lineage::None,
        true);
}

Module alterLifetime(algebra::LifetimeFunctions fns, Timestamp lookahead) {
    return std::make_unique<UnitemporalModule>(
        "alter-lifetime", 1, [fns = std::move(fns)](std::span<const UnitemporalTable> in) { return algebra::alterLifetime(in[0], fns); },
        Lineage::Self, false, lookahead);
}

Module window(Timestamp length) {
    return std::make_unique<UnitemporalModule>(
        "window", 1, [length](std::span<const UnitemporalTable> in) { return algebra::window(in[0], length); }, Lineage::Self, false);
}

Module hoppingWindow(Timestamp period) {
    if (period == Timestamp::zero() || period.isInfinite()) {
        throw Error(ErrorKind::InvalidArgument, "hopping period must be finite and positive");
    }
    return std::make_unique<UnitemporalModule>(
        "hopping-window", 1, [period](std::span<const UnitemporalTable> in) { return algebra::hoppingWindow(in[0], period); },
        Lineage::Self, false, period);
}

Module inserts() {
    return std::make_unique<UnitemporalModule>(
        "inserts", 1, [](std::span<const UnitemporalTable> in) { return algebra::inserts(in[0]); }, Lineage::Self, false);
}

Module deletes() {
    return std::make_unique<UnitemporalModule>(
        "deletes", 1, [](std::span<const UnitemporalTable> in) { return algebra::deletes(in[0]); }, Lineage::Self, false);
}

Module atleast(std::size_t n, std::size_t k, Timestamp scope, pattern::CompositeFilter filter) {
    if (n == 0 || n > k) {
        throw Error(ErrorKind::ArityMismatch, "ATLEAST needs 1 <= n <= k");
    }
    return std::make_unique<PatternModule>(
        "atleast", k,
        [n, scope, filter = std::move(filter)](std::span<const PatternStream> in) { return pattern::atleast(n, in, scope, filter); }, false,
        scope, std::vector<Timestamp>(k, scope));
}

Module sequence(std::size_t k, Timestamp scope, pattern::CompositeFilter filter) {
    if (k < 2) {
        throw Error(ErrorKind::ArityMismatch, "SEQUENCE needs at least two inputs");
    }
    return std::make_unique<PatternModule>(
        "sequence", k, [scope, filter = std::move(filter)](std::span<const PatternStream> in) { return pattern::sequence(in, scope, filter); },
        false, scope, std::vector<Timestamp>(k, scope));
}

Module all(std::size_t k, Timestamp scope, pattern::CompositeFilter filter) {
    return std::make_unique<PatternModule>(
        "all", k, [scope, filter = std::move(filter)](std::span<const PatternStream> in) { return pattern::all(in, scope, filter); }, false,
        scope, std::vector<Timestamp>(k, scope));
}

Module any(std::size_t k, pattern::CompositeFilter filter) {
    return std::make_unique<PatternModule>(
        "any", k, [filter = std::move(filter)](std::span<const PatternStream> in) { return pattern::any(in, filter); }, false, Timestamp(1),
        std::vector<Timestamp>(k, Timestamp(1)));
}

Module atmost(std::size_t n, std::size_t k, Timestamp scope, pattern::CompositeFilter filter) {
    return std::make_unique<PatternModule>(
        "atmost", k,
        [n, scope, filter = std::move(filter)](std::span<const PatternStream> in) { return pattern::atmost(n, in, scope, filter); }, false,
        scope, std::vector<Timestamp>(k, scope));
}

Module unless(Timestamp scope, pattern::BlockPredicate block, pattern::CompositeFilter filter) {
    return std::make_unique<PatternModule>(
        "unless", 2,
        [scope, block = std::move(block), filter = std::move(filter)](std::span<const PatternStream> in) {
            return filteredStream(pattern::unless(in[0], in[1], scope, block), filter);
        },
        true, scope, std::vector<Timestamp>{scope, scope});
}

Module notSequence(std::size_t k, Timestamp scope, pattern::CompositeFilter filter, pattern::BlockPredicate block) {
    if (k < 2) {
        throw Error(ErrorKind::ArityMismatch, "NOT needs a SEQUENCE of at least two inputs");
    }
    return std::make_unique<PatternModule>(
        "not", k + 1,
        [scope, filter = std::move(filter), block = std::move(block)](std::span<const PatternStream> in) {
            return pattern::notSequence(in[0], in.subspan(1), scope, filter, block);
        },
        false, scope, std::vector<Timestamp>(k + 1, scope));
}

Module cancelWhen(pattern::BlockPredicate block, pattern::CompositeFilter filter) {
    return std::make_unique<PatternModule>(
        "cancel-when", 2,
        [block = std::move(block), filter = std::move(filter)](std::span<const PatternStream> in) {
            return filteredStream(pattern::cancelWhen(in[0], in[1], block), filter);
        },
        true, Timestamp::zero(), std::vector<Timestamp>{Timestamp::zero(), kInfinity});
}

Module bind(std::string variable) {
    return std::make_unique<PatternModule>(
        "bind", 1,
        [variable = std::move(variable)](std::span<const PatternStream> in) {
            PatternStream out;
            out.reserve(in[0].size());
            for (const auto& e : in[0]) {
                out.push_back(plan::bindSource(e, variable));
            }
            return out;
        },
        true, Timestamp::zero(), std::vector<Timestamp>{Timestamp::zero()});
}

Module filterEvents(pattern::CompositeFilter filter) {
    return std::make_unique<PatternModule>(
        "select", 1, [filter = std::move(filter)](std::span<const PatternStream> in) { return filteredStream(in[0], filter); }, true,
        Timestamp::zero(), std::vector<Timestamp>{Timestamp::zero()});
}

Module projectEvents(std::vector<std::string> keys) {
    return std::make_unique<PatternModule>(
        "project", 1,
        [keys = std::move(keys)](std::span<const PatternStream> in) {
            PatternStream out = in[0];
            for (auto& e : out) {
                e.payload = plan::projectPayload(e.payload, keys);
            }
            return out;
        },
        true, Timestamp::zero(), std::vector<Timestamp>{Timestamp::zero()});
}

Module slice(std::optional<Interval> occurrence, std::optional<Interval> valid) {
    return std::make_unique<PatternModule>(
        "slice", 1, [occurrence, valid](std::span<const PatternStream> in) { return pattern::sliceEvents(in[0], occurrence, valid); }, true,
        Timestamp::zero(), std::vector<Timestamp>{Timestamp::zero()});
}

Module forNode(const plan::Node& node) {
    using plan::NodeKind;
    const auto k = node.children.size();
    switch (node.kind) {
        case NodeKind::Source: return bind(node.variable);
        case NodeKind::Select: return filterEvents(plan::filterOf(node.filters));
        case NodeKind::Project: return projectEvents(node.projection);
        case NodeKind::Slice: return slice(node.occurrenceSlice, node.validSlice);
        case NodeKind::Atleast: return atleast(node.count, k, node.scope, plan::filterOf(node.filters));
        case NodeKind::Sequence: return sequence(k, node.scope, plan::filterOf(node.filters));
        case NodeKind::All: return all(k, node.scope, plan::filterOf(node.filters));
        case NodeKind::Any: return any(k, plan::filterOf(node.filters));
        case NodeKind::Atmost: return atmost(node.count, k, node.scope, plan::filterOf(node.filters));
        case NodeKind::Unless: return unless(node.scope, plan::blockOf(node.blockPredicates), plan::filterOf(node.filters));
        case NodeKind::Not: return notSequence(k - 1, node.scope, plan::filterOf(node.filters), plan::blockOf(node.blockPredicates));
        case NodeKind::CancelWhen: return cancelWhen(plan::blockOf(node.blockPredicates), plan::filterOf(node.filters));
    }
    throw Error(ErrorKind::InvalidArgument, "unsupported plan node");
}

}// namespace modules

namespace {

struct Pending {
    TritemporalEvent row;
    Timestamp sync;
    Timestamp arrivedAt;
    bool insertion;
};

struct Port {
    std::optional<Timestamp> guarantee;
    std::vector<Pending> buffer;
    Timestamp maxSync = Timestamp::zero();
    std::unordered_set<std::string> known;
    std::map<std::string, TritemporalEvent> beliefs;
};

struct Emitted {
    std::string lineage;
    PatternEvent event;
    std::vector<std::string> sources;
    bool live = true;
};

PatternEvent identityOf(PatternEvent e, bool unitemporal) {
    e.occurrence.end = Timestamp::zero();
    if (unitemporal) {
        e.valid.end = Timestamp::zero();
    }
    return e;
}

}// namespace

struct OperatorInstance::State {
    std::unique_ptr<OperatorModule> module;
    ConsistencyLevel level;
    std::string name;
    Timestamp clock = Timestamp::zero();
    std::vector<Port> ports;
    std::vector<Emitted> emitted;
    std::vector<TritemporalEvent> log;
    std::map<std::string, std::size_t> lastRowOf;
    AnnotatedHistoryTable input;
    Metrics metrics;
    std::optional<Timestamp> outGuarantee;
    std::optional<Timestamp> horizon;
    std::uint64_t nextKey = 0;

    std::optional<Timestamp> frontier() const {
        std::optional<Timestamp> f;
        for (const auto& p : ports) {
            if (!p.guarantee) {
                return std::nullopt;
            }
            f = f ? std::min(*f, *p.guarantee) : *p.guarantee;
        }
        return f;
    }

    TritemporalEvent rowOf(const std::string& lineage, const PatternEvent& e) const {
        TritemporalEvent row;
        row.lineage = lineage;
        row.id = e.id;
        row.occurrence = e.occurrence;
        row.payload = e.payload;
        if (module->unitemporal()) {
            row.valid = e.occurrence;
        } else {
            row.valid = e.valid;
            row.rootTime = e.rootTime;
            row.contributors = e.contributors;
        }
        return row;
    }

    PatternEvent eventOf(const TritemporalEvent& row) const {
        PatternEvent e{row.id, row.valid, row.occurrence, row.rootTime.value_or(row.valid.start), row.contributors, row.payload};
        if (module->unitemporal()) {
            e.valid = row.occurrence;
            e.rootTime = row.occurrence.start;
            e.contributors.clear();
        }
        return e;
    }

    StepOutput ingest(std::size_t port, TritemporalEvent row) {
        if (port >= ports.size()) {
            throw Error(ErrorKind::InvalidArgument, module->name() + " has no port " + std::to_string(port));
        }
        clock = clock + Timestamp(1);
        row.arrival = {clock, kInfinity};
        Port& p = ports[port];
        const bool insertion = p.known.insert(row.lineage).second;
        const Timestamp sync = insertion ? row.occurrence.start : row.occurrence.end;
        TritemporalEvent annotated = row;
        annotated.lineage = std::to_string(port) + ":" + row.lineage;
        input.push_back({sync, std::move(annotated)});
        const auto f = frontier();
        if (level.memory.isFinite() && f && sync + level.memory <= *f) {
            ++metrics.droppedRows;
            return {};
        }
        p.maxSync = std::max(p.maxSync, sync);
        p.buffer.push_back({std::move(row), sync, clock, insertion});
        return step();
    }

    StepOutput declareGuarantee(std::size_t port, Timestamp threshold) {
        if (port >= ports.size()) {
            throw Error(ErrorKind::InvalidArgument, module->name() + " has no port " + std::to_string(port));
        }
        Port& p = ports[port];
        if (p.guarantee && threshold < *p.guarantee) {
            throw Error(ErrorKind::NonMonotoneGuarantee,
                        "guarantee on port " + std::to_string(port) + " moved back from " + p.guarantee->toString() + " to " + threshold.toString());
        }
        p.guarantee = threshold;
        return step();
    }

    void apply(std::size_t port, const Pending& pending) {
        auto& beliefs = ports[port].beliefs;
        const auto& row = pending.row;
        if (pending.insertion) {
            if (!row.isRemoval()) {
                beliefs[row.lineage] = row;
            }
            return;
        }
        auto it = beliefs.find(row.lineage);
        if (it == beliefs.end() || !(row.occurrence.end < it->second.occurrence.end)) {
            return;
        }
        if (row.isRemoval()) {
            beliefs.erase(it);
        } else {
            it->second.occurrence.end = row.occurrence.end;
        }
    }

    StepOutput step() {
        const auto f = frontier();
        bool changed = false;
        for (std::size_t i = 0; i < ports.size(); ++i) {
            Port& p = ports[i];
            std::vector<Pending> released;
            std::vector<Pending> held;
            for (auto& pending : p.buffer) {
                const bool covered = f && pending.sync <= *f;
                const bool waitedEnough = level.blocking.isFinite() && pending.sync + level.blocking <= p.maxSync;
                (covered || waitedEnough ? released : held).push_back(std::move(pending));
            }
            p.buffer = std::move(held);
            std::stable_sort(released.begin(), released.end(), [](const Pending& a, const Pending& b) { return a.sync < b.sync; });
            for (const auto& r : released) {
                metrics.blockingTime += (clock - r.arrivedAt).ticks();
                apply(i, r);
                changed = true;
            }
        }
        std::optional<Timestamp> g;
        if (f && *f >= module->lookahead()) {
            g = *f - module->lookahead();
        }
        const bool advanced = g && (!outGuarantee || *g > *outGuarantee);
        StepOutput out;
        if (changed || advanced) {
            out.rows = reconcile(g);
        }
        if (advanced) {
            outGuarantee = g;
            out.guarantee = g;
        }
        prune(f);
        metrics.maxStateRows = std::max<std::uint64_t>(metrics.maxStateRows, stateRows());
        return out;
    }

    std::size_t stateRows() const {
        std::size_t n = 0;
        for (const auto& p : ports) {
            n += p.beliefs.size() + p.buffer.size();
        }
        return n;
    }

    struct Batch {
        std::vector<std::pair<Timestamp, TritemporalEvent>> rows;
        std::vector<bool> insertion;
    };

    void emitInsert(Batch& batch, PatternEvent e, std::vector<std::string> sources) {
        if (!(e.occurrence.start < e.occurrence.end)) {
            return;
        }
        std::string lineage = name + "#" + std::to_string(++nextKey);
        batch.rows.emplace_back(e.occurrence.start, rowOf(lineage, e));
        batch.insertion.push_back(true);
        emitted.push_back({std::move(lineage), std::move(e), std::move(sources), true});
    }

    void adjust(Batch& batch, std::size_t index, Timestamp end) {
        Emitted& e = emitted[index];
        if (end == e.event.occurrence.end) {
            return;
        }
        if (end > e.event.occurrence.end) {
            PatternEvent grown = e.event;
            std::vector<std::string> sources = e.sources;
            grown.occurrence.end = end;
            adjust(batch, index, e.event.occurrence.start);
            emitInsert(batch, std::move(grown), std::move(sources));
            return;
        }
        e.event.occurrence.end = end;
        if (module->unitemporal()) {
            e.event.valid.end = end;
        }
        e.live = e.event.occurrence.start < end;
        batch.rows.emplace_back(end, rowOf(e.lineage, e.event));
        batch.insertion.push_back(false);
    }

    void diff(Batch& batch,
              std::vector<Produced> target,
              const std::vector<std::size_t>& candidates,
              const std::function<Timestamp(Timestamp)>& settle,
              const std::unordered_set<std::string>& retained) {
        const bool unitemporal = module->unitemporal();
        std::map<PatternEvent, std::vector<std::size_t>> byIdentity;
        for (auto i : candidates) {
            byIdentity[identityOf(emitted[i].event, unitemporal)].push_back(i);
        }
        for (auto& t : target) {
            auto it = byIdentity.find(identityOf(t.event, unitemporal));
            const Timestamp end = settle(t.event.occurrence.end);
            if (it != byIdentity.end() && !it->second.empty()) {
                const auto index = it->second.back();
                it->second.pop_back();
                adjust(batch, index, end);
            } else {
                t.event.occurrence.end = end;
                if (unitemporal) {
                    t.event.valid.end = end;
                }
                emitInsert(batch, std::move(t.event), std::move(t.sources));
            }
        }
        for (auto& [identity, left] : byIdentity) {
            for (auto index : left) {
                const Emitted& e = emitted[index];
                const bool reconcilable = module->coalescing()
                                          || std::all_of(e.sources.begin(), e.sources.end(), [&](const std::string& s) { return retained.contains(s); });
                if (reconcilable) {
                    adjust(batch, index, e.event.occurrence.start);
                    continue;
                }
                if (e.sources.empty() || e.event.occurrence.end.isFinite()) {
                    continue;
                }
                const TritemporalEvent* origin = nullptr;
                for (const auto& p : ports) {
                    for (const auto& [lineage, belief] : p.beliefs) {
                        if (belief.id == e.sources.back() && (unitemporal || belief.occurrence.start == e.event.occurrence.start)) {
                            origin = &belief;
                        }
                    }
                }
                if (!origin) {
                    adjust(batch, index, e.event.occurrence.start);
                    continue;
                }
                const Timestamp end = std::min(e.event.occurrence.end, settle(origin->occurrence.end));
                adjust(batch, index, std::max(end, e.event.occurrence.start));
            }
        }
    }

    std::vector<TritemporalEvent> reconcile(std::optional<Timestamp> g) {
        std::vector<PatternStream> inputs(ports.size());
        std::unordered_set<std::string> retained;
        for (std::size_t i = 0; i < ports.size(); ++i) {
            for (const auto& [lineage, row] : ports[i].beliefs) {
                inputs[i].push_back(eventOf(row));
                retained.insert(row.id);
            }
            std::sort(inputs[i].begin(), inputs[i].end());
        }
        std::vector<Produced> target = module->evaluate(inputs);
        if (level.blocking.isInfinite()) {
            std::erase_if(target, [&](const Produced& p) { return !g || p.event.occurrence.start > *g; });
        }
        const auto settle = [g](Timestamp end) { return g && end <= *g ? end : kInfinity; };
        Batch batch;
        std::vector<std::size_t> candidates;
        if (module->coalescing() && horizon && *horizon > Timestamp::zero()) {
            const Timestamp b = *horizon;
            std::vector<Produced> rest;
            std::vector<Produced> atBoundary;
            for (auto& t : target) {
                if (t.event.occurrence.end <= b) {
                    continue;
                }
                if (t.event.occurrence.start <= b) {
                    t.event.occurrence.start = b;
                    t.event.valid.start = b;
                    t.event.id = algebra::snapshotId(b, t.event.payload);
                    atBoundary.push_back(std::move(t));
                } else {
                    rest.push_back(std::move(t));
                }
            }
            for (std::size_t i = 0; i < emitted.size(); ++i) {
                const Emitted& e = emitted[i];
                if (!e.live || e.event.occurrence.end <= b) {
                    continue;
                }
                if (e.event.occurrence.start > b) {
                    candidates.push_back(i);
                    continue;
                }
                auto match = std::find_if(atBoundary.begin(), atBoundary.end(), [&](const Produced& p) { return p.event.payload == e.event.payload; });
                if (match != atBoundary.end()) {
                    adjust(batch, i, settle(match->event.occurrence.end));
                    atBoundary.erase(match);
                } else {
                    adjust(batch, i, settle(b));
                }
            }
            for (auto& t : atBoundary) {
                rest.push_back(std::move(t));
            }
            diff(batch, std::move(rest), candidates, settle, retained);
        } else {
            for (std::size_t i = 0; i < emitted.size(); ++i) {
                if (emitted[i].live) {
                    candidates.push_back(i);
                }
            }
            diff(batch, std::move(target), candidates, settle, retained);
        }
        return publish(std::move(batch));
    }

    std::vector<TritemporalEvent> publish(Batch batch) {
        std::vector<std::size_t> order(batch.rows.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return batch.rows[a].first < batch.rows[b].first; });
        std::vector<TritemporalEvent> out;
        out.reserve(order.size());
        std::optional<Timestamp> group;
        for (auto i : order) {
            auto& [sync, row] = batch.rows[i];
            if (!group || *group != sync) {
                clock = clock + Timestamp(1);
                group = sync;
            }
            row.arrival = {clock, kInfinity};
            if (auto it = lastRowOf.find(row.lineage); it != lastRowOf.end()) {
                log[it->second].arrival.end = clock;
            }
            lastRowOf[row.lineage] = log.size();
            log.push_back(row);
            ++metrics.outputRows;
            if (!batch.insertion[i]) {
                ++metrics.retractionRows;
            }
            out.push_back(std::move(row));
        }
        return out;
    }

    void prune(std::optional<Timestamp> f) {
        if (level.memory.isInfinite() || !f || *f < level.memory) {
            return;
        }
        const Timestamp h = *f - level.memory;
        horizon = h;
        std::unordered_set<std::string> keep;
        for (const auto& e : emitted) {
            if (!e.live || e.event.occurrence.end.isFinite() || e.sources.empty()) {
                continue;
            }
            if (module->unitemporal()) {
                keep.insert(e.sources.begin(), e.sources.end());
            } else {
                keep.insert(e.sources.back());
            }
        }
        for (std::size_t i = 0; i < ports.size(); ++i) {
            const Timestamp reach = module->backreach(i);
            std::erase_if(ports[i].beliefs, [&](const auto& entry) {
                const TritemporalEvent& row = entry.second;
                if (module->unitemporal()) {
                    return row.occurrence.end <= h && !keep.contains(row.id);
                }
                return row.valid.start + reach <= h && !keep.contains(row.id);
            });
        }
    }
};

OperatorInstance::OperatorInstance(std::unique_ptr<OperatorModule> module, ConsistencyLevel level, std::string name)
    : state_(std::make_unique<State>()) {
    if (level.blocking > level.memory) {
        throw Error(ErrorKind::InvalidArgument, "blocking limit exceeds memory limit");
    }
    state_->ports.resize(module->arity());
    state_->module = std::move(module);
    state_->level = level;
    state_->name = std::move(name);
}

OperatorInstance::~OperatorInstance() = default;
OperatorInstance::OperatorInstance(OperatorInstance&&) noexcept = default;
OperatorInstance& OperatorInstance::operator=(OperatorInstance&&) noexcept = default;

StepOutput OperatorInstance::ingest(std::size_t port, TritemporalEvent row) { return state_->ingest(port, std::move(row)); }

StepOutput OperatorInstance::declareGuarantee(std::size_t port, Timestamp threshold) { return state_->declareGuarantee(port, threshold); }

StepOutput OperatorInstance::finish() {
    StepOutput out;
    for (std::size_t i = 0; i < state_->ports.size(); ++i) {
        auto part = state_->declareGuarantee(i, kInfinity);
        out.rows.insert(out.rows.end(), part.rows.begin(), part.rows.end());
        if (part.guarantee) {
            out.guarantee = part.guarantee;
        }
    }
    return out;
}

StepOutput OperatorInstance::switchLevel(ConsistencyLevel level, SyncPointPair at) {
    if (!isSyncPoint(state_->input, at) || !isSyncPoint(annotatedOutput(), at)) {
        throw Error(ErrorKind::NotASyncPoint,
                    "(" + at.occurrence.toString() + ", " + at.cedr.toString() + ") is not a sync point of both input and output");
    }
    if (level.blocking > level.memory) {
        throw Error(ErrorKind::InvalidArgument, "blocking limit exceeds memory limit");
    }
    if (level == state_->level) {
        return {};
    }
    state_->level = level;
    return state_->step();
}

const ConsistencyLevel& OperatorInstance::level() const { return state_->level; }
const OperatorModule& OperatorInstance::module() const { return *state_->module; }
Timestamp OperatorInstance::clock() const { return state_->clock; }
std::optional<Timestamp> OperatorInstance::outputGuarantee() const { return state_->outGuarantee; }
const std::vector<TritemporalEvent>& OperatorInstance::output() const { return state_->log; }
const AnnotatedHistoryTable& OperatorInstance::annotatedInput() const { return state_->input; }
AnnotatedHistoryTable OperatorInstance::annotatedOutput() const { return annotateSync(HistoryTable(state_->log)); }
const Metrics& OperatorInstance::metrics() const { return state_->metrics; }
std::size_t OperatorInstance::stateRows() const { return state_->stateRows(); }

std::vector<SyncPointPair> syncPointsOf(const AnnotatedHistoryTable& table) {
    std::set<SyncPointPair> candidates;
    for (const auto& row : table) {
        candidates.insert({row.sync, row.event.arrival.start});
    }
    std::vector<SyncPointPair> out;
    for (const auto& c : candidates) {
        if (isSyncPoint(table, c)) {
            out.push_back(c);
        }
    }
    return out;
}

HistoryTable prefix(const std::vector<TritemporalEvent>& table, Timestamp cedrTime) {
    std::vector<TritemporalEvent> rows;
    for (const auto& row : table) {
        if (row.arrival.start <= cedrTime) {
            rows.push_back(row);
        }
    }
    return HistoryTable(std::move(rows));
}

struct Pipeline::Impl {
    struct Slot {
        OperatorInstance instance;
        std::optional<std::size_t> parent;
        std::size_t port = 0;
        std::string stream;
    };
    std::vector<Slot> slots;
    std::vector<TritemporalEvent> collected;
    std::vector<Timestamp> guarantees;

    std::size_t build(const plan::Node& node, ConsistencyLevel level, std::optional<std::size_t> parent, std::size_t port) {
        ConsistencyLevel own = level;
        if (node.memory || node.blocking) {
            own = ConsistencyLevel::of(node.memory.value_or(level.memory), node.blocking.value_or(level.blocking));
        }
        const std::size_t index = slots.size();
        std::string name = index == 0 ? "out" : "n" + std::to_string(index);
        slots.push_back({OperatorInstance(modules::forNode(node), own, std::move(name)), parent, port,
                         node.kind == plan::NodeKind::Source ? node.stream : std::string()});
        if (node.kind != plan::NodeKind::Source) {
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                build(node.children[i], level, index, i);
            }
        }
        return index;
    }

    void propagate(std::size_t index, StepOutput out, std::vector<TritemporalEvent>& sink) {
        const auto parent = slots[index].parent;
        if (!parent) {
            sink.insert(sink.end(), out.rows.begin(), out.rows.end());
            if (out.guarantee) {
                guarantees.push_back(*out.guarantee);
            }
            return;
        }
        const std::size_t port = slots[index].port;
        for (auto& row : out.rows) {
            propagate(*parent, slots[*parent].instance.ingest(port, std::move(row)), sink);
        }
        if (out.guarantee) {
            propagate(*parent, slots[*parent].instance.declareGuarantee(port, *out.guarantee), sink);
        }
    }

    template<typename F>
    std::vector<TritemporalEvent> onSources(const std::string& stream, F&& f) {
        std::vector<TritemporalEvent> sink;
        bool found = false;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!slots[i].stream.empty() && slots[i].stream == stream) {
                found = true;
                propagate(i, f(slots[i].instance), sink);
            }
        }
        if (!found) {
            throw Error(ErrorKind::InvalidArgument, "query reads no stream named '" + stream + "'");
        }
        return sink;
    }
};

Pipeline::Pipeline(const plan::Node& root, ConsistencyLevel level) : impl_(std::make_unique<Impl>()) {
    impl_->build(root, level, std::nullopt, 0);
}

Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;

std::set<std::string> Pipeline::streams() const {
    std::set<std::string> out;
    for (const auto& s : impl_->slots) {
        if (!s.stream.empty()) {
            out.insert(s.stream);
        }
    }
    return out;
}

std::vector<TritemporalEvent> Pipeline::ingest(const std::string& stream, TritemporalEvent row) {
    return impl_->onSources(stream, [&](OperatorInstance& inst) { return inst.ingest(0, row); });
}

std::vector<TritemporalEvent> Pipeline::declareGuarantee(const Guarantee& g) {
    return impl_->onSources(g.stream, [&](OperatorInstance& inst) { return inst.declareGuarantee(0, g.threshold); });
}

std::vector<TritemporalEvent> Pipeline::finish() {
    std::vector<TritemporalEvent> sink;
    for (std::size_t i = 0; i < impl_->slots.size(); ++i) {
        if (!impl_->slots[i].stream.empty()) {
            impl_->propagate(i, impl_->slots[i].instance.finish(), sink);
        }
    }
    return sink;
}

std::vector<TritemporalEvent> Pipeline::switchLevel(ConsistencyLevel level, SyncPointPair at) {
    std::vector<TritemporalEvent> sink;
    auto& root = impl_->slots.front().instance;
    if (!isSyncPoint(root.annotatedInput(), at) || !isSyncPoint(root.annotatedOutput(), at)) {
        throw Error(ErrorKind::NotASyncPoint, "(" + at.occurrence.toString() + ", " + at.cedr.toString() + ") is not a sync point of the query");
    }
    for (std::size_t i = impl_->slots.size(); i-- > 0;) {
        auto& inst = impl_->slots[i].instance;
        const auto input = inst.annotatedInput();
        const auto output = inst.annotatedOutput();
        const SyncPointPair own{at.occurrence, inst.clock()};
        if (i == 0) {
            impl_->propagate(i, inst.switchLevel(level, at), sink);
        } else if (isSyncPoint(input, own) && isSyncPoint(output, own)) {
            impl_->propagate(i, inst.switchLevel(level, own), sink);
        } else {
            throw Error(ErrorKind::NotASyncPoint, "operator " + inst.module().name() + " is not at a sync point for occurrence time "
                                                      + at.occurrence.toString());
        }
    }
    return sink;
}

const std::vector<TritemporalEvent>& Pipeline::output() const { return impl_->slots.front().instance.output(); }
AnnotatedHistoryTable Pipeline::annotatedOutput() const { return impl_->slots.front().instance.annotatedOutput(); }
const std::vector<Timestamp>& Pipeline::outputGuarantees() const { return impl_->guarantees; }
const OperatorInstance& Pipeline::root() const { return impl_->slots.front().instance; }

Metrics Pipeline::metrics() const {
    Metrics m;
    for (const auto& s : impl_->slots) {
        const auto& own = s.instance.metrics();
        m.blockingTime += own.blockingTime;
        m.maxStateRows += own.maxStateRows;
        m.droppedRows += own.droppedRows;
    }
    m.outputRows = root().metrics().outputRows;
    m.retractionRows = root().metrics().retractionRows;
    return m;
}

}// namespace cedr::engine
