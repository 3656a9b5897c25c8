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
#include <cedr/plan.hpp>

#include <algorithm>

namespace cedr::plan {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Operand::toString() const {
    if (!literal) {
        return key();
    }
    if (const auto* s = std::get_if<std::string>(&literal->value())) {
        std::string out = "'";
        for (char c : *s) {
            if (c == '\'' || c == '\\') {
                out += '\\';
            }
            out += c;
        }
        return out + "'";
    }
    return literal->toString();
}

const char* toString(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

namespace {
std::optional<CompareOp> compareOpOf(std::string_view text) {
    for (auto op : {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge}) {
        if (text == toString(op)) {
            return op;
        }
    }
    return std::nullopt;
}

const Scalar* lookup(const Operand& o, const Payload& first, const Payload* second) {
    if (o.literal) {
        return &*o.literal;
    }
    const std::string k = o.key();
    if (const Scalar* v = first.find(k)) {
        return v;
    }
    return second != nullptr ? second->find(k) : nullptr;
}

bool holds(CompareOp op, std::partial_ordering ord) {
    switch (op) {
        case CompareOp::Eq: return ord == std::partial_ordering::equivalent;
        case CompareOp::Ne: return ord == std::partial_ordering::less || ord == std::partial_ordering::greater;
        case CompareOp::Lt: return ord == std::partial_ordering::less;
        case CompareOp::Le: return ord == std::partial_ordering::less || ord == std::partial_ordering::equivalent;
        case CompareOp::Gt: return ord == std::partial_ordering::greater;
        case CompareOp::Ge: return ord == std::partial_ordering::greater || ord == std::partial_ordering::equivalent;
    }
    return false;
}

bool compare(const Comparison& c, const Payload& first, const Payload* second) {
    const Scalar* a = lookup(c.lhs, first, second);
    const Scalar* b = lookup(c.rhs, first, second);
    if (a == nullptr || b == nullptr) {
        return false;
    }
    const auto ord = Scalar::compareValues(*a, *b);
    return ord && holds(c.op, *ord);
}
}// namespace

std::set<std::string> Comparison::variables() const {
    std::set<std::string> out;
    for (const auto* o : {&lhs, &rhs}) {
        if (!o->isLiteral()) {
            out.insert(o->variable);
        }
    }
    return out;
}

bool Comparison::evaluate(const Payload& payload) const { return compare(*this, payload, nullptr); }

bool Comparison::evaluate(const Payload& candidate, const Payload& blocker) const { return compare(*this, candidate, &blocker); }

std::string Comparison::toString() const { return lhs.toString() + " " + plan::toString(op) + " " + rhs.toString(); }

const char* toString(NodeKind kind) {
    switch (kind) {
        case NodeKind::Source: return "SOURCE";
        case NodeKind::Select: return "SELECT";
        case NodeKind::Project: return "PROJECT";
        case NodeKind::Atleast: return "ATLEAST";
        case NodeKind::Sequence: return "SEQUENCE";
        case NodeKind::All: return "ALL";
        case NodeKind::Any: return "ANY";
        case NodeKind::Atmost: return "ATMOST";
        case NodeKind::Unless: return "UNLESS";
        case NodeKind::Not: return "NOT";
        case NodeKind::CancelWhen: return "CANCEL-WHEN";
        case NodeKind::Slice: return "SLICE";
    }
    return "?";
}

namespace {
std::optional<NodeKind> nodeKindOf(std::string_view text) {
    for (int i = 0; i <= static_cast<int>(NodeKind::Slice); ++i) {
        const auto kind = static_cast<NodeKind>(i);
        if (text == toString(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}
}// namespace

std::optional<std::size_t> Node::negatedChild() const {
    switch (kind) {
        case NodeKind::Unless:
        case NodeKind::CancelWhen: return 1;
        case NodeKind::Not: return 0;
        default: return std::nullopt;
    }
}

std::set<std::string> Node::boundVariables() const {
    if (kind == NodeKind::Source) {
        return {variable};
    }
    std::set<std::string> out;
    const auto negated = negatedChild();
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (negated && *negated == i) {
            continue;
        }
        out.merge(children[i].boundVariables());
    }
    return out;
}

std::set<std::string> Node::allVariables() const {
    if (kind == NodeKind::Source) {
        return {variable};
    }
    std::set<std::string> out;
    for (const auto& c : children) {
        out.merge(c.allVariables());
    }
    return out;
}

Node source(std::string stream, std::string variable) {
    Node n;
    n.kind = NodeKind::Source;
    n.stream = std::move(stream);
    n.variable = std::move(variable);
    return n;
}

namespace {
bool covers(const std::set<std::string>& outer, const std::set<std::string>& inner) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

std::string joined(const std::set<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        out += out.empty() ? n : ", " + n;
    }
    return out;
}

void place(Node& n, const Comparison& c, const std::set<std::string>& vars) {
    if (n.kind == NodeKind::Source) {
        Node select;
        select.kind = NodeKind::Select;
        select.filters.push_back(c);
        select.children.push_back(std::move(n));
        n = std::move(select);
        return;
    }
    if (n.kind == NodeKind::Select && n.children.front().kind == NodeKind::Source) {
        n.filters.push_back(c);
        return;
    }
    if (!vars.empty()) {
        for (auto& child : n.children) {
            if (covers(child.allVariables(), vars)) {
                place(child, c, vars);
                return;
            }
        }
    }
    const auto negated = n.negatedChild();
    std::set<std::string> visible = n.boundVariables();
    if (negated && !vars.empty()) {
        const auto& blocker = n.children[*negated];
        const auto blockerVars = blocker.allVariables();
        std::set<std::string> hidden;
        std::set_intersection(vars.begin(), vars.end(), blockerVars.begin(), blockerVars.end(), std::inserter(hidden, hidden.end()));
        if (!hidden.empty()) {
            visible.merge(blocker.boundVariables());
            if (!covers(visible, vars)) {
                throw Error(ErrorKind::CompileError, "predicate " + c.toString() + " reaches into a nested negation");
            }
            n.blockPredicates.push_back(c);
            return;
        }
    }
    if (!covers(visible, vars)) {
        throw Error(ErrorKind::CompileError,
                    "predicate " + c.toString() + " relates negated variables to variables outside their negation: " + joined(vars));
    }
    n.filters.push_back(c);
}
}// namespace

Node injectPredicates(Node root, const std::vector<Comparison>& predicates) {
    const auto bound = root.allVariables();
    for (const auto& c : predicates) {
        const auto vars = c.variables();
        for (const auto& v : vars) {
            if (!bound.contains(v)) {
                throw Error(ErrorKind::UnboundVariable, "unbound variable '" + v + "' in " + c.toString());
            }
        }
        place(root, c, vars);
    }
    return root;
}

PatternEvent bindSource(const PatternEvent& primitive, const std::string& variable) {
    PatternEvent out = primitive;
    Payload::Fields fields;
    for (const auto& [name, value] : primitive.payload.fields()) {
        fields.emplace(variable + "." + name, value);
    }
    out.payload = Payload(std::move(fields));
    out.rootTime = primitive.valid.start;
    out.contributors.clear();
    return out;
}

pattern::CompositeFilter filterOf(const std::vector<Comparison>& filters) {
    if (filters.empty()) {
        return {};
    }
    return [filters](const Payload& p) {
        return std::all_of(filters.begin(), filters.end(), [&](const Comparison& c) { return c.evaluate(p); });
    };
}

pattern::BlockPredicate blockOf(const std::vector<Comparison>& predicates) {
    if (predicates.empty()) {
        return {};
    }
    return [predicates](const Payload& candidate, const Payload& blocker) {
        return std::all_of(predicates.begin(), predicates.end(), [&](const Comparison& c) { return c.evaluate(candidate, blocker); });
    };
}

Payload projectPayload(const Payload& payload, const std::vector<std::string>& keys) {
    Payload out;
    for (const auto& k : keys) {
        if (const Scalar* v = payload.find(k)) {
            out.set(k, *v);
        }
    }
    return out;
}

namespace {
PatternStream filtered(PatternStream events, const std::vector<Comparison>& filters) {
    if (filters.empty()) {
        return events;
    }
    const auto keep = filterOf(filters);
    std::erase_if(events, [&](const PatternEvent& e) { return !keep(e.payload); });
    return events;
}
}// namespace

PatternStream evaluate(const Node& root, const Inputs& inputs) {
    std::vector<PatternStream> kids;
    if (root.kind != NodeKind::Source) {
        for (const auto& c : root.children) {
            kids.push_back(evaluate(c, inputs));
        }
    }
    const std::span<const PatternStream> all(kids);
    const auto filter = filterOf(root.filters);
    const auto block = blockOf(root.blockPredicates);
    PatternStream out;
    switch (root.kind) {
        case NodeKind::Source: {
            auto it = inputs.find(root.stream);
            if (it == inputs.end()) {
                throw Error(ErrorKind::InvalidArgument, "no input for stream '" + root.stream + "'");
            }
            for (const auto& e : it->second) {
                out.push_back(bindSource(e, root.variable));
            }
            std::sort(out.begin(), out.end());
            return out;
        }
        case NodeKind::Select: return filtered(std::move(kids.front()), root.filters);
        case NodeKind::Project:
            out = std::move(kids.front());
            for (auto& e : out) {
                e.payload = projectPayload(e.payload, root.projection);
            }
            return out;
        case NodeKind::Slice: return pattern::sliceEvents(kids.front(), root.occurrenceSlice, root.validSlice);
        case NodeKind::Atleast: return pattern::atleast(root.count, all, root.scope, filter);
        case NodeKind::Sequence: return pattern::sequence(all, root.scope, filter);
        case NodeKind::All: return pattern::all(all, root.scope, filter);
        case NodeKind::Any: return pattern::any(all, filter);
        case NodeKind::Atmost: return pattern::atmost(root.count, all, root.scope, filter);
        case NodeKind::Unless: return filtered(pattern::unless(kids[0], kids[1], root.scope, block), root.filters);
        case NodeKind::CancelWhen: return filtered(pattern::cancelWhen(kids[0], kids[1], block), root.filters);
        case NodeKind::Not: return pattern::notSequence(kids[0], all.subspan(1), root.scope, filter, block);
    }
    return out;
}

namespace {
ordered_json operandToJson(const Operand& o) {
    ordered_json j;
    if (o.literal) {
        j["literal"] = ordered_json::parse(o.literal->toJson().dump());
    } else {
        j["var"] = o.variable;
        j["attr"] = o.attribute;
    }
    return j;
}

ordered_json comparisonToJson(const Comparison& c) {
    ordered_json j;
    j["lhs"] = operandToJson(c.lhs);
    j["op"] = toString(c.op);
    j["rhs"] = operandToJson(c.rhs);
    return j;
}

ordered_json intervalToJson(const Interval& i) {
    ordered_json j = ordered_json::array();
    for (auto t : {i.start, i.end}) {
        if (t.isInfinite()) {
            j.push_back("inf");
        } else {
            j.push_back(t.ticks());
        }
    }
    return j;
}

Timestamp timestampOf(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") {
        return kInfinity;
    }
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw Error(ErrorKind::InvalidArgument, "bad timestamp in plan: " + j.dump());
    }
    return Timestamp(j.get<std::uint64_t>());
}

ordered_json timestampJson(Timestamp t) {
    return t.isInfinite() ? ordered_json("inf") : ordered_json(t.ticks());
}

Operand operandFromJson(const json& j) {
    if (j.contains("literal")) {
        return Operand::constant(Scalar::fromJson(j.at("literal")));
    }
    return Operand::attr(j.at("var").get<std::string>(), j.at("attr").get<std::string>());
}

Comparison comparisonFromJson(const json& j) {
    const auto op = compareOpOf(j.at("op").get<std::string>());
    if (!op) {
        throw Error(ErrorKind::InvalidArgument, "unknown comparison " + j.at("op").dump());
    }
    return {operandFromJson(j.at("lhs")), *op, operandFromJson(j.at("rhs"))};
}

Interval intervalFromJson(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw Error(ErrorKind::InvalidArgument, "interval must be [start, end]");
    }
    return {timestampOf(j[0]), timestampOf(j[1])};
}

bool hasScope(NodeKind kind) {
    switch (kind) {
        case NodeKind::Atleast:
        case NodeKind::Sequence:
        case NodeKind::All:
        case NodeKind::Atmost:
        case NodeKind::Unless:
        case NodeKind::Not: return true;
        default: return false;
    }
}
}// namespace

ordered_json toJson(const Node& node) {
    ordered_json j;
    j["type"] = toString(node.kind);
    if (node.kind == NodeKind::Source) {
        j["stream"] = node.stream;
        j["variable"] = node.variable;
    }
    if (node.kind == NodeKind::Atleast || node.kind == NodeKind::Atmost) {
        j["count"] = node.count;
    }
    if (hasScope(node.kind)) {
        j["scope"] = timestampJson(node.scope);
    }
    if (!node.filters.empty()) {
        auto& arr = j["predicates"] = ordered_json::array();
        for (const auto& c : node.filters) {
            arr.push_back(comparisonToJson(c));
        }
    }
    if (!node.blockPredicates.empty()) {
        auto& arr = j["block"] = ordered_json::array();
        for (const auto& c : node.blockPredicates) {
            arr.push_back(comparisonToJson(c));
        }
    }
    if (node.kind == NodeKind::Project) {
        j["projection"] = node.projection;
    }
    if (node.occurrenceSlice) {
        j["occurrence"] = intervalToJson(*node.occurrenceSlice);
    }
    if (node.validSlice) {
        j["valid"] = intervalToJson(*node.validSlice);
    }
    if (node.memory) {
        j["memory"] = timestampJson(*node.memory);
    }
    if (node.blocking) {
        j["blocking"] = timestampJson(*node.blocking);
    }
    if (!node.children.empty()) {
        auto& arr = j["children"] = ordered_json::array();
        for (const auto& c : node.children) {
            arr.push_back(toJson(c));
        }
    }
    return j;
}

Node fromJson(const json& j) {
    try {
        Node n;
        const auto kind = nodeKindOf(j.at("type").get<std::string>());
        if (!kind) {
            throw Error(ErrorKind::InvalidArgument, "unknown node type " + j.at("type").dump());
        }
        n.kind = *kind;
        if (n.kind == NodeKind::Source) {
            n.stream = j.at("stream").get<std::string>();
            n.variable = j.at("variable").get<std::string>();
        }
        if (j.contains("count")) {
            n.count = j["count"].get<std::size_t>();
        }
        if (j.contains("scope")) {
            n.scope = timestampOf(j["scope"]);
        }
        for (const auto& c : j.value("predicates", json::array())) {
            n.filters.push_back(comparisonFromJson(c));
        }
        for (const auto& c : j.value("block", json::array())) {
            n.blockPredicates.push_back(comparisonFromJson(c));
        }
        if (j.contains("projection")) {
            n.projection = j["projection"].get<std::vector<std::string>>();
        }
        if (j.contains("occurrence")) {
            n.occurrenceSlice = intervalFromJson(j["occurrence"]);
        }
        if (j.contains("valid")) {
            n.validSlice = intervalFromJson(j["valid"]);
        }
        if (j.contains("memory")) {
            n.memory = timestampOf(j["memory"]);
        }
        if (j.contains("blocking")) {
            n.blocking = timestampOf(j["blocking"]);
        }
        for (const auto& c : j.value("children", json::array())) {
            n.children.push_back(fromJson(c));
        }
        return n;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("malformed plan: ") + e.what());
    }
}

}// namespace cedr::plan
