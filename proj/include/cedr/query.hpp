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

#ifndef CEDR_QUERY_HPP_
#define CEDR_QUERY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <cedr/payload.hpp>
#include <cedr/plan.hpp>

namespace cedr::query {

/// 1-based line and column into the source text; `offset` is the byte position.
struct Span {
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t length = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    Span span;
    std::string message;
    std::string hint;

    /// `line:column: error: message` plus the hint on its own line.
    std::string toString() const;
};

enum class TimeUnit { Ticks, Seconds, Minutes, Hours };

struct Duration {
    std::uint64_t amount = 0;
    TimeUnit unit = TimeUnit::Ticks;

    std::string toString() const;
    bool operator==(const Duration&) const = default;
};

/// Either an event type leaf or an operator call. Equality ignores spans.
struct Expr {
    enum class Kind { EventType, Call };

    Kind kind = Kind::EventType;
    /// Event type of a leaf, canonical operator name of a call ("SEQUENCE", "CANCEL-WHEN", "UNLESS'" ...).
    std::string name;
    /// AS name of a leaf.
    std::optional<std::string> binding;
    std::vector<Expr> args;
    /// n of ATLEAST, ATMOST and UNLESS'.
    std::optional<std::uint64_t> count;
    std::optional<Duration> scope;
    Span span;

    bool operator==(const Expr& o) const;
};

struct Operand {
    std::string variable;
    std::string attribute;
    std::optional<Scalar> literal;
    Span span;

    bool operator==(const Operand& o) const;
};

struct Predicate {
    enum class Kind {
        Compare,
        /// CorrelationKey(attribute, EQUAL | UNIQUE)
        CorrelationKey,
        /// [attribute Equal literal]
        ValueTest
    };

    Kind kind = Kind::Compare;
    Operand lhs;
    plan::CompareOp op = plan::CompareOp::Eq;
    Operand rhs;
    std::string attribute;
    /// CorrelationKey: true for EQUAL, false for UNIQUE.
    bool equal = true;
    Scalar literal;
    Span span;

    bool operator==(const Predicate& o) const;
};

/// Inclusive bounds; a missing upper bound is unbounded.
struct SliceBounds {
    Duration from;
    std::optional<Duration> to;

    bool operator==(const SliceBounds&) const = default;
};

struct Query {
    std::string name;
    Expr when;
    std::vector<Predicate> where;
    /// `variable.attribute` keys.
    std::vector<std::string> output;
    std::optional<SliceBounds> occurrenceSlice;
    std::optional<SliceBounds> validSlice;

    bool operator==(const Query&) const = default;
};

struct ParseResult {
    std::optional<Query> query;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return query.has_value(); }
};

/**
 * query   := "EVENT" ident "WHEN" expr ["WHERE" predconj] ["OUTPUT" ref {"," ref}] [slice] [slice]
 * expr    := OPNAME "(" args ")" | ident [["AS"] ident]
 * predconj:= pred {"AND" pred}
 * pred    := "{" operand cmp operand "}" | "CorrelationKey" "(" ident "," ("EQUAL"|"UNIQUE") ")"
 *          | "[" ident "Equal" literal "]"
 * slice   := ("@" | "#") "[" duration "," (duration | "inf") "]"
 *
 * Keywords and operator names are case-insensitive. `//` starts a comment. Never throws.
 */
ParseResult parse(std::string_view source);

/// Canonical text that parses back to an equal Query.
std::string prettyPrint(const Query& query);

/// AST as JSON, for inspection.
nlohmann::ordered_json toJson(const Query& query);

struct CompileOptions {
    /// Length of one tick in seconds.
    std::uint64_t secondsPerTick = 60;
};

/// Parses "minute", "1 minute", "30 seconds", "1s", "2h" and similar. Throws Error(InvalidArgument).
std::uint64_t parseTickUnit(std::string_view text);

std::uint64_t toTicks(const Duration& d, const CompileOptions& options);

/**
 * Lowers the AST to a plan: operator nodes with scopes in ticks, injected WHERE
 * predicates, a Slice node and then a Project node on top when present.
 * Throws Error(CompileError | UnboundVariable).
 */
plan::Node compile(const Query& query, const CompileOptions& options = {});

}// namespace cedr::query

#endif// CEDR_QUERY_HPP_
