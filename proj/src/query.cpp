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
#include <cedr/query.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace cedr::query {

std::string Diagnostic::toString() const {
    std::string out = std::to_string(span.line) + ":" + std::to_string(span.column) + ": "
                      + (severity == Severity::Error ? "error: " : "warning: ") + message;
    if (!hint.empty()) {
        out += "\n  hint: " + hint;
    }
    return out;
}

std::string Duration::toString() const {
    switch (unit) {
        case TimeUnit::Ticks: return std::to_string(amount);
        case TimeUnit::Seconds: return std::to_string(amount) + " seconds";
        case TimeUnit::Minutes: return std::to_string(amount) + " minutes";
        case TimeUnit::Hours: return std::to_string(amount) + " hours";
    }
    return std::to_string(amount);
}

bool Expr::operator==(const Expr& o) const {
    return kind == o.kind && name == o.name && binding == o.binding && args == o.args && count == o.count && scope == o.scope;
}

bool Operand::operator==(const Operand& o) const { return variable == o.variable && attribute == o.attribute && literal == o.literal; }

bool Predicate::operator==(const Predicate& o) const {
    if (kind != o.kind) {
        return false;
    }
    switch (kind) {
        case Kind::Compare: return lhs == o.lhs && op == o.op && rhs == o.rhs;
        case Kind::CorrelationKey: return attribute == o.attribute && equal == o.equal;
        case Kind::ValueTest: return attribute == o.attribute && literal == o.literal;
    }
    return false;
}

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

enum class Tok { Ident, Integer, Decimal, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Span span;
};

struct Failure {
    Diagnostic diagnostic;
};

Diagnostic error(Span span, std::string message, std::string hint = {}) { return {Severity::Error, span, std::move(message), std::move(hint)}; }

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skipBlank();
            Token t;
            t.span = here();
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::Ident;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                    advance();
                }
                t.text = std::string(src_.substr(t.span.offset, pos_ - t.span.offset));
                if (upper(t.text) == "UNLESS") {
                    if (pos_ < src_.size() && src_[pos_] == '\'') {
                        advance();
                        t.text += "'";
                    } else if (src_.substr(pos_, 3) == "\xE2\x80\xB2") {
                        advance(3);
                        t.text += "'";
                    }
                }
            } else if (std::isdigit(static_cast<unsigned char>(c))
                       || (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) && numberAllowed(out))) {
                t.kind = Tok::Integer;
                advance();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    advance();
                }
                if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                    t.kind = Tok::Decimal;
                    advance();
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                        advance();
                    }
                }
                t.text = std::string(src_.substr(t.span.offset, pos_ - t.span.offset));
            } else if (c == '\'') {
                t.kind = Tok::String;
                advance();
                while (true) {
                    if (pos_ >= src_.size()) {
                        t.span.length = pos_ - t.span.offset;
                        throw Failure{error(t.span, "unterminated string literal", "close it with a single quote")};
                    }
                    if (src_[pos_] == '\'') {
                        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\'') {
                            t.text += '\'';
                            advance(2);
                            continue;
                        }
                        advance();
                        break;
                    }
                    t.text += src_[pos_];
                    advance();
                }
            } else {
                static const std::vector<std::string> two = {"==", "!=", "<>", "<=", ">="};
                t.kind = Tok::Punct;
                const auto pair = src_.substr(pos_, 2);
                if (std::find(two.begin(), two.end(), pair) != two.end()) {
                    t.text = std::string(pair);
                    advance(2);
                } else if (std::string_view("(){}[],.=<>@#-").find(c) != std::string_view::npos) {
                    t.text = std::string(1, c);
                    advance();
                } else {
                    t.span.length = 1;
                    const auto byte = static_cast<unsigned char>(c);
                    std::string shown = std::isprint(byte) ? "'" + std::string(1, c) + "'" : "byte 0x" + hex(byte);
                    throw Failure{error(t.span, "unexpected character " + shown)};
                }
            }
            t.span.length = pos_ - t.span.offset;
            out.push_back(std::move(t));
        }
    }

  private:
    static std::string hex(unsigned char b) {
        const char* digits = "0123456789abcdef";
        return {digits[b >> 4], digits[b & 15]};
    }

    static bool numberAllowed(const std::vector<Token>& out) {
        if (out.empty()) {
            return true;
        }
        const Token& prev = out.back();
        return prev.kind == Tok::Punct && prev.text != ")" && prev.text != "]";
    }

    Span here() const { return {pos_, line_, column_, 0}; }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
            ++pos_;
        }
    }

    void skipBlank() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
            } else {
                return;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

const std::set<std::string> kKeywords = {"EVENT", "WHEN", "WHERE", "OUTPUT", "AND", "AS"};
const std::vector<std::string> kOperators = {"SEQUENCE", "UNLESS", "UNLESS'", "NOT", "CANCEL-WHEN", "ALL", "ANY", "ATLEAST", "ATMOST"};
constexpr std::size_t kMaxDepth = 256;

std::optional<TimeUnit> unitOf(const std::string& word) {
    static const std::map<std::string, TimeUnit> units = {
        {"TICK", TimeUnit::Ticks},       {"TICKS", TimeUnit::Ticks},     {"SECOND", TimeUnit::Seconds}, {"SECONDS", TimeUnit::Seconds},
        {"SEC", TimeUnit::Seconds},      {"SECS", TimeUnit::Seconds},    {"MINUTE", TimeUnit::Minutes}, {"MINUTES", TimeUnit::Minutes},
        {"MIN", TimeUnit::Minutes},      {"MINS", TimeUnit::Minutes},    {"HOUR", TimeUnit::Hours},     {"HOURS", TimeUnit::Hours},
    };
    auto it = units.find(upper(word));
    if (it == units.end()) {
        return std::nullopt;
    }
    return it->second;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Query run() {
        Query q;
        expectKeyword("EVENT");
        q.name = expectIdent("query name").text;
        expectKeyword("WHEN");
        q.when = parseExpr(0);
        if (isKeyword("WHERE")) {
            next();
            q.where.push_back(parsePredicate());
            while (isKeyword("AND")) {
                next();
                q.where.push_back(parsePredicate());
            }
        }
        if (isKeyword("OUTPUT")) {
            next();
            q.output.push_back(parseRef());
            while (isPunct(",")) {
                next();
                q.output.push_back(parseRef());
            }
        }
        while (isPunct("@") || isPunct("#")) {
            const Token marker = next();
            auto& slot = marker.text == "@" ? q.occurrenceSlice : q.validSlice;
            if (slot) {
                throw Failure{error(marker.span, "duplicate " + marker.text + " slice")};
            }
            slot = parseSlice();
        }
        if (peek().kind != Tok::End) {
            throw Failure{error(peek().span, "unexpected '" + peek().text + "' after the end of the query")};
        }
        return q;
    }

  private:
    const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }

    Token next() {
        Token t = peek();
        if (pos_ < tokens_.size() - 1) {
            ++pos_;
        }
        return t;
    }

    bool isKeyword(const std::string& kw, std::size_t ahead = 0) const { return peek(ahead).kind == Tok::Ident && upper(peek(ahead).text) == kw; }
    bool isPunct(const std::string& p, std::size_t ahead = 0) const { return peek(ahead).kind == Tok::Punct && peek(ahead).text == p; }

    static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : "'" + t.text + "'"; }

    [[noreturn]] void unexpected(const std::string& expected) const {
        throw Failure{error(peek().span, "expected " + expected + ", found " + describe(peek()))};
    }

    void expectKeyword(const std::string& kw) {
        if (!isKeyword(kw)) {
            unexpected(kw);
        }
        next();
    }

    void expectPunct(const std::string& p) {
        if (!isPunct(p)) {
            unexpected("'" + p + "'");
        }
        next();
    }

    Token expectIdent(const std::string& what) {
        if (peek().kind != Tok::Ident || kKeywords.contains(upper(peek().text))) {
            unexpected(what);
        }
        return next();
    }

    std::uint64_t parseCount(const Token& t) {
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
            throw Failure{error(t.span, "'" + t.text + "' is not a valid count or duration", "use a non-negative integer")};
        }
        return value;
    }

    Duration parseDuration() {
        if (peek().kind != Tok::Integer) {
            unexpected("a duration");
        }
        Duration d{parseCount(next()), TimeUnit::Ticks};
        if (peek().kind == Tok::Ident) {
            if (auto unit = unitOf(peek().text)) {
                d.unit = *unit;
                next();
            }
        }
        return d;
    }

    struct Item {
        std::optional<Expr> expr;
        std::optional<Duration> duration;
        Span span;
    };

    Expr parseExpr(std::size_t depth) {
        if (depth > kMaxDepth) {
            throw Failure{error(peek().span, "expression nested too deeply", "at most " + std::to_string(kMaxDepth) + " levels are supported")};
        }
        const Token head = expectIdent("an event type or operator");
        std::string op = upper(head.text);
        Span span = head.span;
        if (op == "CANCEL" && isPunct("-") && isKeyword("WHEN", 1)) {
            next();
            next();
            op = "CANCEL-WHEN";
        }
        if (!isPunct("(")) {
            if (op == "CANCEL-WHEN") {
                unexpected("'('");
            }
            Expr leaf;
            leaf.kind = Expr::Kind::EventType;
            leaf.name = head.text;
            leaf.span = span;
            if (isKeyword("AS")) {
                next();
                leaf.binding = expectIdent("a variable name after AS").text;
            } else if (peek().kind == Tok::Ident && !kKeywords.contains(upper(peek().text))) {
                leaf.binding = next().text;
            }
            return leaf;
        }
        if (std::find(kOperators.begin(), kOperators.end(), op) == kOperators.end()) {
            throw Failure{error(span, "unknown operator " + head.text,
                                "expected one of SEQUENCE, UNLESS, NOT, CANCEL-WHEN, ALL, ANY, ATLEAST, ATMOST")};
        }
        next();
        std::vector<Item> items;
        if (!isPunct(")")) {
            while (true) {
                Item item;
                item.span = peek().span;
                if (peek().kind == Tok::Integer) {
                    item.duration = parseDuration();
                } else {
                    item.expr = parseExpr(depth + 1);
                }
                items.push_back(std::move(item));
                if (isPunct(",")) {
                    next();
                    continue;
                }
                break;
            }
        }
        const Token close = peek();
        expectPunct(")");
        span.length = close.span.offset + 1 - span.offset;
        return shape(op, span, std::move(items));
    }

    /// Checks the argument pattern of operator `op` and builds the call.
    Expr shape(const std::string& op, Span span, std::vector<Item> items) {
        Expr call;
        call.kind = Expr::Kind::Call;
        call.name = op;
        call.span = span;
        std::size_t first = 0;
        std::size_t last = items.size();
        const bool counted = op == "ATLEAST" || op == "ATMOST";
        const bool scoped = op != "ANY" && op != "NOT" && op != "CANCEL-WHEN";
        static const std::map<std::string, std::string> usage = {
            {"SEQUENCE", "SEQUENCE(E1, ..., Ek, w) with k >= 2"},
            {"UNLESS", "UNLESS(E1, E2, w)"},
            {"UNLESS'", "UNLESS'(E1, E2, n, w)"},
            {"NOT", "NOT(E, SEQUENCE(E1, ..., Ek, w))"},
            {"CANCEL-WHEN", "CANCEL-WHEN(E1, E2)"},
            {"ALL", "ALL(E1, ..., Ek, w)"},
            {"ANY", "ANY(E1, ..., Ek)"},
            {"ATLEAST", "ATLEAST(n, E1, ..., Ek, w) with 1 <= n <= k"},
            {"ATMOST", "ATMOST(n, E1, ..., Ek, w) with 1 <= n <= k"},
        };
        const auto bad = [&]() { return Failure{error(span, "wrong arguments to " + op, "expected " + usage.at(op))}; };
        if (counted) {
            if (items.empty() || !items.front().duration || items.front().duration->unit != TimeUnit::Ticks) {
                throw bad();
            }
            call.count = items.front().duration->amount;
            first = 1;
        }
        if (scoped) {
            if (last <= first || !items[last - 1].duration) {
                throw bad();
            }
            call.scope = items[last - 1].duration;
            --last;
        }
        if (op == "UNLESS'") {
            if (last <= first || !items[last - 1].duration || items[last - 1].duration->unit != TimeUnit::Ticks) {
                throw bad();
            }
            call.count = items[last - 1].duration->amount;
            --last;
        }
        for (std::size_t i = first; i < last; ++i) {
            if (!items[i].expr) {
                throw bad();
            }
            call.args.push_back(std::move(*items[i].expr));
        }
        const std::size_t k = call.args.size();
        const bool arityOk = [&] {
            if (op == "SEQUENCE") {
                return k >= 2;
            }
            if (op == "UNLESS" || op == "UNLESS'" || op == "CANCEL-WHEN") {
                return k == 2;
            }
            if (op == "NOT") {
                return k == 2 && call.args[1].kind == Expr::Kind::Call && call.args[1].name == "SEQUENCE";
            }
            if (counted) {
                return k >= 1 && *call.count >= 1 && *call.count <= k;
            }
            return k >= 1;
        }();
        if (!arityOk) {
            throw bad();
        }
        if (op == "UNLESS'" && *call.count == 0) {
            throw bad();
        }
        return call;
    }

    Operand parseOperand() {
        Operand o;
        o.span = peek().span;
        const Token t = peek();
        if (t.kind == Tok::String) {
            next();
            o.literal = Scalar(t.text);
        } else if (t.kind == Tok::Integer) {
            next();
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
                throw Failure{error(t.span, "integer literal '" + t.text + "' out of range")};
            }
            o.literal = Scalar(v);
        } else if (t.kind == Tok::Decimal) {
            next();
            double v = 0;
            std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            o.literal = Scalar(v);
        } else if (t.kind == Tok::Ident && (upper(t.text) == "TRUE" || upper(t.text) == "FALSE")) {
            next();
            o.literal = Scalar(upper(t.text) == "TRUE");
        } else {
            o.variable = expectIdent("an attribute reference or literal").text;
            expectPunct(".");
            o.attribute = expectIdent("an attribute name").text;
        }
        return o;
    }

    Predicate parsePredicate() {
        Predicate p;
        p.span = peek().span;
        if (isPunct("{")) {
            next();
            p.kind = Predicate::Kind::Compare;
            p.lhs = parseOperand();
            static const std::map<std::string, plan::CompareOp> ops = {
                {"=", plan::CompareOp::Eq}, {"==", plan::CompareOp::Eq}, {"!=", plan::CompareOp::Ne}, {"<>", plan::CompareOp::Ne},
                {"<", plan::CompareOp::Lt}, {"<=", plan::CompareOp::Le}, {">", plan::CompareOp::Gt},  {">=", plan::CompareOp::Ge},
            };
            auto it = peek().kind == Tok::Punct ? ops.find(peek().text) : ops.end();
            if (it == ops.end()) {
                unexpected("a comparison operator");
            }
            next();
            p.op = it->second;
            p.rhs = parseOperand();
            expectPunct("}");
        } else if (isKeyword("CORRELATIONKEY")) {
            next();
            p.kind = Predicate::Kind::CorrelationKey;
            expectPunct("(");
            p.attribute = expectIdent("an attribute name").text;
            expectPunct(",");
            const Token mode = expectIdent("EQUAL or UNIQUE");
            if (upper(mode.text) != "EQUAL" && upper(mode.text) != "UNIQUE") {
                throw Failure{error(mode.span, "unknown correlation mode '" + mode.text + "'", "use EQUAL or UNIQUE")};
            }
            p.equal = upper(mode.text) == "EQUAL";
            expectPunct(")");
        } else if (isPunct("[")) {
            next();
            p.kind = Predicate::Kind::ValueTest;
            p.attribute = expectIdent("an attribute name").text;
            if (!isKeyword("EQUAL")) {
                unexpected("Equal");
            }
            next();
            const Operand value = parseOperand();
            if (!value.literal) {
                throw Failure{error(value.span, "expected a literal value")};
            }
            p.literal = *value.literal;
            expectPunct("]");
        } else {
            unexpected("a predicate ('{', CorrelationKey or '[')");
        }
        p.span.length = peek().span.offset > p.span.offset ? peek().span.offset - p.span.offset : 0;
        return p;
    }

    std::string parseRef() {
        const std::string variable = expectIdent("an output attribute").text;
        expectPunct(".");
        return variable + "." + expectIdent("an attribute name").text;
    }

    SliceBounds parseSlice() {
        expectPunct("[");
        SliceBounds b;
        b.from = parseDuration();
        expectPunct(",");
        if (isKeyword("INF") || isKeyword("INFINITY")) {
            next();
        } else {
            b.to = parseDuration();
        }
        expectPunct("]");
        return b;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

void collectBindings(const Expr& e, std::vector<std::pair<std::string, Span>>& out) {
    if (e.kind == Expr::Kind::EventType) {
        if (e.binding) {
            out.emplace_back(*e.binding, e.span);
        }
        return;
    }
    for (const auto& a : e.args) {
        collectBindings(a, out);
    }
}

std::vector<Diagnostic> check(const Query& q) {
    std::vector<Diagnostic> out;
    std::vector<std::pair<std::string, Span>> bindings;
    collectBindings(q.when, bindings);
    std::set<std::string> bound;
    for (const auto& [name, span] : bindings) {
        if (!bound.insert(name).second) {
            out.push_back(error(span, "variable '" + name + "' is bound more than once", "choose a distinct AS name"));
        }
    }
    const auto need = [&](const std::string& variable, Span span) {
        if (!variable.empty() && !bound.contains(variable)) {
            out.push_back(error(span, "unbound variable '" + variable + "'", "bind it with AS in the WHEN clause"));
        }
    };
    for (const auto& p : q.where) {
        if (p.kind == Predicate::Kind::Compare) {
            need(p.lhs.variable, p.lhs.span);
            need(p.rhs.variable, p.rhs.span);
        }
    }
    for (const auto& key : q.output) {
        need(key.substr(0, key.find('.')), {});
    }
    return out;
}

std::string literalText(const Scalar& s) {
    const auto& v = s.value();
    if (const auto* str = std::get_if<std::string>(&v)) {
        std::string out = "'";
        for (char c : *str) {
            out += c;
            if (c == '\'') {
                out += '\'';
            }
        }
        return out + "'";
    }
    if (const auto* b = std::get_if<bool>(&v)) {
        return *b ? "true" : "false";
    }
    if (const auto* d = std::get_if<double>(&v)) {
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *d, std::chars_format::fixed);
        std::string text(buf, ec == std::errc() ? ptr : buf);
        if (text.find('.') == std::string::npos) {
            text += ".0";
        }
        return text;
    }
    return std::to_string(std::get<std::int64_t>(v));
}

std::string operandText(const Operand& o) { return o.literal ? literalText(*o.literal) : o.variable + "." + o.attribute; }

std::string exprText(const Expr& e) {
    if (e.kind == Expr::Kind::EventType) {
        return e.binding ? e.name + " AS " + *e.binding : e.name;
    }
    std::vector<std::string> parts;
    if (e.count && e.name != "UNLESS'") {
        parts.push_back(std::to_string(*e.count));
    }
    for (const auto& a : e.args) {
        parts.push_back(exprText(a));
    }
    if (e.count && e.name == "UNLESS'") {
        parts.push_back(std::to_string(*e.count));
    }
    if (e.scope) {
        parts.push_back(e.scope->toString());
    }
    std::string out = e.name + "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? ", " : "") + parts[i];
    }
    return out + ")";
}

std::string predicateText(const Predicate& p) {
    switch (p.kind) {
        case Predicate::Kind::Compare:
            return "{" + operandText(p.lhs) + " " + plan::toString(p.op) + " " + operandText(p.rhs) + "}";
        case Predicate::Kind::CorrelationKey: return "CorrelationKey(" + p.attribute + (p.equal ? ", EQUAL)" : ", UNIQUE)");
        case Predicate::Kind::ValueTest: return "[" + p.attribute + " Equal " + literalText(p.literal) + "]";
    }
    return {};
}

std::string sliceText(const SliceBounds& b) { return "[" + b.from.toString() + ", " + (b.to ? b.to->toString() : "inf") + "]"; }

nlohmann::ordered_json exprJson(const Expr& e) {
    nlohmann::ordered_json j;
    if (e.kind == Expr::Kind::EventType) {
        j["event"] = e.name;
        if (e.binding) {
            j["as"] = *e.binding;
        }
        return j;
    }
    j["op"] = e.name;
    if (e.count) {
        j["n"] = *e.count;
    }
    j["args"] = nlohmann::ordered_json::array();
    for (const auto& a : e.args) {
        j["args"].push_back(exprJson(a));
    }
    if (e.scope) {
        j["scope"] = e.scope->toString();
    }
    return j;
}

}// namespace

ParseResult parse(std::string_view source) {
    ParseResult result;
    try {
        Parser parser(Lexer(source).run());
        Query q = parser.run();
        result.diagnostics = check(q);
        if (result.diagnostics.empty()) {
            result.query = std::move(q);
        }
    } catch (const Failure& f) {
        result.diagnostics.push_back(f.diagnostic);
    } catch (const std::exception& e) {
        result.diagnostics.push_back(error({}, std::string("internal parser failure: ") + e.what()));
    }
    return result;
}

std::string prettyPrint(const Query& q) {
    std::string out = "EVENT " + q.name + "\nWHEN " + exprText(q.when) + "\n";
    if (!q.where.empty()) {
        out += "WHERE ";
        for (std::size_t i = 0; i < q.where.size(); ++i) {
            out += (i ? " AND " : "") + predicateText(q.where[i]);
        }
        out += "\n";
    }
    if (!q.output.empty()) {
        out += "OUTPUT ";
        for (std::size_t i = 0; i < q.output.size(); ++i) {
            out += (i ? ", " : "") + q.output[i];
        }
        out += "\n";
    }
    if (q.occurrenceSlice) {
        out += "@ " + sliceText(*q.occurrenceSlice) + "\n";
    }
    if (q.validSlice) {
        out += "# " + sliceText(*q.validSlice) + "\n";
    }
    return out;
}

nlohmann::ordered_json toJson(const Query& q) {
    nlohmann::ordered_json j;
    j["name"] = q.name;
    j["when"] = exprJson(q.when);
    j["where"] = nlohmann::ordered_json::array();
    for (const auto& p : q.where) {
        j["where"].push_back(predicateText(p));
    }
    j["output"] = q.output;
    if (q.occurrenceSlice) {
        j["occurrence_slice"] = sliceText(*q.occurrenceSlice);
    }
    if (q.validSlice) {
        j["valid_slice"] = sliceText(*q.validSlice);
    }
    return j;
}

std::uint64_t parseTickUnit(std::string_view text) {
    std::string s(text);
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
    }
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
        ++j;
    }
    std::uint64_t amount = 1;
    if (j > i) {
        std::from_chars(s.data() + i, s.data() + j, amount);
    }
    std::string word = upper(s.substr(j));
    std::erase_if(word, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    std::uint64_t factor = 0;
    if (word.empty() && j > i) {
        factor = 1;
    } else if (word == "S") {
        factor = 1;
    } else if (word == "M") {
        factor = 60;
    } else if (word == "H") {
        factor = 3600;
    } else if (auto unit = unitOf(word); unit && *unit != TimeUnit::Ticks) {
        factor = *unit == TimeUnit::Seconds ? 1 : *unit == TimeUnit::Minutes ? 60 : 3600;
    }
    if (factor == 0 || amount == 0) {
        throw Error(ErrorKind::InvalidArgument, "invalid tick unit '" + s + "' (examples: minute, 30 seconds, 1h)");
    }
    return amount * factor;
}

std::uint64_t toTicks(const Duration& d, const CompileOptions& options) {
    if (d.unit == TimeUnit::Ticks) {
        return d.amount;
    }
    const std::uint64_t seconds = d.amount * (d.unit == TimeUnit::Seconds ? 1 : d.unit == TimeUnit::Minutes ? 60 : 3600);
    if (options.secondsPerTick == 0 || seconds % options.secondsPerTick != 0) {
        throw Error(ErrorKind::CompileError,
                    "duration " + d.toString() + " is not a whole number of ticks of " + std::to_string(options.secondsPerTick) + " seconds");
    }
    return seconds / options.secondsPerTick;
}

namespace {

struct Lowering {
    const CompileOptions& options;
    std::map<std::string, int> typeUses;
    std::vector<std::string> bound;

    plan::Node lower(const Expr& e) {
        if (e.kind == Expr::Kind::EventType) {
            std::string variable;
            if (e.binding) {
                variable = *e.binding;
                bound.push_back(variable);
            } else {
                const int n = ++typeUses[e.name];
                variable = n == 1 ? e.name : e.name + "#" + std::to_string(n);
            }
            return plan::source(e.name, variable);
        }
        if (e.name == "UNLESS'") {
            throw Error(ErrorKind::CompileError, "UNLESS' is parsed but not supported by the compiler");
        }
        plan::Node node;
        static const std::map<std::string, plan::NodeKind> kinds = {
            {"SEQUENCE", plan::NodeKind::Sequence}, {"UNLESS", plan::NodeKind::Unless}, {"NOT", plan::NodeKind::Not},
            {"CANCEL-WHEN", plan::NodeKind::CancelWhen}, {"ALL", plan::NodeKind::All}, {"ANY", plan::NodeKind::Any},
            {"ATLEAST", plan::NodeKind::Atleast}, {"ATMOST", plan::NodeKind::Atmost},
        };
        node.kind = kinds.at(e.name);
        if (e.count) {
            node.count = *e.count;
        }
        if (e.scope) {
            node.scope = toTicks(*e.scope, options);
        }
        if (node.kind == plan::NodeKind::Not) {
            node.children.push_back(lower(e.args[0]));
            const Expr& seq = e.args[1];
            node.scope = toTicks(*seq.scope, options);
            for (const auto& a : seq.args) {
                node.children.push_back(lower(a));
            }
            return node;
        }
        for (const auto& a : e.args) {
            node.children.push_back(lower(a));
        }
        return node;
    }
};

plan::Operand lowerOperand(const Operand& o) {
    return o.literal ? plan::Operand::constant(*o.literal) : plan::Operand::attr(o.variable, o.attribute);
}

}// namespace

plan::Node compile(const Query& query, const CompileOptions& options) {
    Lowering lowering{options, {}, {}};
    plan::Node root = lowering.lower(query.when);
    std::vector<plan::Comparison> predicates;
    const auto& vars = lowering.bound;
    for (const auto& p : query.where) {
        switch (p.kind) {
            case Predicate::Kind::Compare: predicates.push_back({lowerOperand(p.lhs), p.op, lowerOperand(p.rhs)}); break;
            case Predicate::Kind::CorrelationKey:
                for (std::size_t i = 0; i < vars.size(); ++i) {
                    for (std::size_t j = i + 1; j < vars.size(); ++j) {
                        predicates.push_back({plan::Operand::attr(vars[i], p.attribute), p.equal ? plan::CompareOp::Eq : plan::CompareOp::Ne,
                                              plan::Operand::attr(vars[j], p.attribute)});
                    }
                }
                break;
            case Predicate::Kind::ValueTest:
                for (const auto& v : vars) {
                    predicates.push_back({plan::Operand::attr(v, p.attribute), plan::CompareOp::Eq, plan::Operand::constant(p.literal)});
                }
                break;
        }
    }
    root = plan::injectPredicates(std::move(root), predicates);
    if (query.occurrenceSlice || query.validSlice) {
        const auto interval = [&](const SliceBounds& b) {
            const Timestamp to = b.to ? Timestamp(toTicks(*b.to, options)) + Timestamp(1) : kInfinity;
            return Interval{toTicks(b.from, options), to};
        };
        plan::Node slice;
        slice.kind = plan::NodeKind::Slice;
        if (query.occurrenceSlice) {
            slice.occurrenceSlice = interval(*query.occurrenceSlice);
        }
        if (query.validSlice) {
            slice.validSlice = interval(*query.validSlice);
        }
        slice.children.push_back(std::move(root));
        root = std::move(slice);
    }
    if (!query.output.empty()) {
        plan::Node project;
        project.kind = plan::NodeKind::Project;
        project.projection = query.output;
        project.children.push_back(std::move(root));
        root = std::move(project);
    }
    return root;
}

}// namespace cedr::query
