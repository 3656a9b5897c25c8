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

#ifndef CEDR_PLAN_HPP_
#define CEDR_PLAN_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include <cedr/events.hpp>
#include <cedr/pattern.hpp>

namespace cedr::plan {

/// Attribute reference `variable.attribute` or a literal.
struct Operand {
    std::string variable;
    std::string attribute;
    std::optional<Scalar> literal;

    static Operand attr(std::string variable, std::string attribute) { return {std::move(variable), std::move(attribute), std::nullopt}; }
    static Operand constant(Scalar value) { return {{}, {}, std::move(value)}; }
    bool isLiteral() const { return literal.has_value(); }
    /// Payload key of a bound attribute.
    std::string key() const { return variable + "." + attribute; }
    std::string toString() const;
    bool operator==(const Operand&) const = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* toString(CompareOp op);

/**
 * Parameterized predicate. Attributes are looked up as `variable.attribute` in the
 * payloads handed to evaluate(); a missing attribute or incomparable values make the
 * comparison false.
 */
struct Comparison {
    Operand lhs;
    CompareOp op = CompareOp::Eq;
    Operand rhs;

    std::set<std::string> variables() const;
    bool evaluate(const Payload& payload) const;
    /// Looks attributes up in `candidate` first, then in `blocker`.
    bool evaluate(const Payload& candidate, const Payload& blocker) const;
    std::string toString() const;
    bool operator==(const Comparison&) const = default;
};

enum class NodeKind { Source, Select, Project, Atleast, Sequence, All, Any, Atmost, Unless, Not, CancelWhen, Slice };

const char* toString(NodeKind kind);

/**
 * @brief Operator tree node.
 *
 * Children by kind:
 *  - Source: none; reads `stream`, binds `variable`.
 *  - Select, Project, Slice: one.
 *  - Atleast, Sequence, All, Any, Atmost: the operand streams.
 *  - Unless, CancelWhen: [E1, E2]; E2 is negated.
 *  - Not: [E, E1 .. Ek]; E is negated, E1 .. Ek form the sequence.
 */
struct Node {
    NodeKind kind = NodeKind::Source;
    std::string stream;
    std::string variable;
    Timestamp scope = Timestamp::zero();
    std::size_t count = 0;
    std::vector<Comparison> filters;
    std::vector<Comparison> blockPredicates;
    std::vector<std::string> projection;
    std::optional<Interval> occurrenceSlice;
    std::optional<Interval> validSlice;
    std::optional<Timestamp> memory;
    std::optional<Timestamp> blocking;
    std::vector<Node> children;

    /// Index of the negated child, if any.
    std::optional<std::size_t> negatedChild() const;
    /// Variables whose attributes appear in this node's output payloads.
    std::set<std::string> boundVariables() const;
    /// Bound variables plus those of negated descendants.
    std::set<std::string> allVariables() const;
    bool operator==(const Node&) const = default;
};

Node source(std::string stream, std::string variable);

/**
 * Pushes each predicate to the lowest node whose variables cover it. A predicate over
 * a single variable becomes a Select above that variable's source. A predicate that
 * mentions a negated variable and cannot descend further restricts which events block.
 * Throws Error(UnboundVariable).
 */
Node injectPredicates(Node root, const std::vector<Comparison>& predicates);

/// Input streams by name. Events are primitive; payload attributes are unqualified.
using Inputs = std::map<std::string, PatternStream, std::less<>>;

/// Denotational evaluation of the whole tree.
PatternStream evaluate(const Node& root, const Inputs& inputs);

/// Pieces the engine reuses to run one node.
PatternEvent bindSource(const PatternEvent& primitive, const std::string& variable);
pattern::CompositeFilter filterOf(const std::vector<Comparison>& filters);
pattern::BlockPredicate blockOf(const std::vector<Comparison>& predicates);
Payload projectPayload(const Payload& payload, const std::vector<std::string>& keys);

/// Deterministic serialized form.
nlohmann::ordered_json toJson(const Node& node);
/// Inverse of toJson. Throws Error(InvalidArgument).
Node fromJson(const nlohmann::json& j);

}// namespace cedr::plan

#endif// CEDR_PLAN_HPP_
