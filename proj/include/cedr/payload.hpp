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

#ifndef CEDR_PAYLOAD_HPP_
#define CEDR_PAYLOAD_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace cedr {

/// Scalar payload value. Doubles compare bitwise so that coalescing stays deterministic.
class Scalar {
  public:
    using Value = std::variant<bool, std::int64_t, double, std::string>;

    Scalar() = default;
    Scalar(bool v) : value_(v) {}// NOLINT(google-explicit-constructor)
    Scalar(std::int64_t v) : value_(v) {}// NOLINT(google-explicit-constructor)
    Scalar(int v) : value_(static_cast<std::int64_t>(v)) {}// NOLINT(google-explicit-constructor)
    Scalar(double v) : value_(v) {}// NOLINT(google-explicit-constructor)
    Scalar(std::string v) : value_(std::move(v)) {}// NOLINT(google-explicit-constructor)
    Scalar(const char* v) : value_(std::string(v)) {}// NOLINT(google-explicit-constructor)

    const Value& value() const { return value_; }
    bool isNumeric() const { return std::holds_alternative<std::int64_t>(value_) || std::holds_alternative<double>(value_); }
    bool isInteger() const { return std::holds_alternative<std::int64_t>(value_); }
    /// Numeric value as double; only meaningful when isNumeric().
    double asDouble() const;

    bool operator==(const Scalar& o) const;
    /// Total order: by type index first, then by value (doubles by bit pattern).
    std::strong_ordering operator<=>(const Scalar& o) const;

    /// Value comparison used by predicates: numeric types compare numerically across int/double.
    /// Returns nullopt when the two values are not comparable.
    static std::optional<std::partial_ordering> compareValues(const Scalar& a, const Scalar& b);

    std::string toString() const;
    nlohmann::json toJson() const;
    static Scalar fromJson(const nlohmann::json& j);

  private:
    Value value_ = std::int64_t{0};
};

/// Ordered attribute map; names are unique by construction.
class Payload {
  public:
    using Fields = std::map<std::string, Scalar, std::less<>>;

    Payload() = default;
    Payload(std::initializer_list<Fields::value_type> init) : fields_(init) {}
    explicit Payload(Fields fields) : fields_(std::move(fields)) {}

    const Fields& fields() const { return fields_; }
    bool empty() const { return fields_.empty(); }
    std::size_t size() const { return fields_.size(); }

    const Scalar* find(std::string_view name) const;
    void set(std::string name, Scalar value) { fields_[std::move(name)] = std::move(value); }
    bool erase(std::string_view name);

    bool operator==(const Payload&) const = default;
    std::strong_ordering operator<=>(const Payload& o) const;

    /// Canonical single-line text; equal payloads render identically.
    std::string toString() const;
    nlohmann::json toJson() const;
    static Payload fromJson(const nlohmann::json& j);

    /**
     * Concatenation: left fields first, then right. A name present on both sides is
     * renamed to `name#l` / `name#r` in the result.
     */
    static Payload concat(const Payload& left, const Payload& right);

    /// Union of fields where the right side only adds names the left lacks.
    static Payload merge(const Payload& left, const Payload& right);

    /// Concatenation of several payloads in order; a repeated name from the i-th
    /// payload (0-based, i > 0) is renamed to `name#<i+1>`.
    static Payload concatAll(std::initializer_list<const Payload*> parts);
    template<typename It>
    static Payload concatRange(It first, It last);

  private:
    Fields fields_;
};

template<typename It>
Payload Payload::concatRange(It first, It last) {
    Payload out;
    std::size_t index = 0;
    for (; first != last; ++first, ++index) {
        const Payload& part = *first;
        for (const auto& [name, value] : part.fields()) {
            if (index > 0 && out.fields_.contains(name)) {
                out.fields_[name + "#" + std::to_string(index + 1)] = value;
            } else {
                out.fields_.emplace(name, value);
            }
        }
    }
    return out;
}

}// namespace cedr

#endif// CEDR_PAYLOAD_HPP_
