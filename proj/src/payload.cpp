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

#include <cedr/payload.hpp>

#include <bit>
#include <sstream>

namespace cedr {

double Scalar::asDouble() const {
    if (const auto* i = std::get_if<std::int64_t>(&value_)) {
        return static_cast<double>(*i);
    }
    if (const auto* d = std::get_if<double>(&value_)) {
        return *d;
    }
    return 0.0;
}

bool Scalar::operator==(const Scalar& o) const { return (*this <=> o) == std::strong_ordering::equal; }

std::strong_ordering Scalar::operator<=>(const Scalar& o) const {
    if (value_.index() != o.value_.index()) {
        return value_.index() <=> o.value_.index();
    }
    return std::visit(
        [&](const auto& lhs) -> std::strong_ordering {
            using T = std::decay_t<decltype(lhs)>;
            const auto& rhs = std::get<T>(o.value_);
            if constexpr (std::is_same_v<T, double>) {
                return std::bit_cast<std::uint64_t>(lhs) <=> std::bit_cast<std::uint64_t>(rhs);
            } else if constexpr (std::is_same_v<T, std::string>) {
                const int c = lhs.compare(rhs);
                return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
            } else {
                return lhs <=> rhs;
            }
        },
        value_);
}

std::optional<std::partial_ordering> Scalar::compareValues(const Scalar& a, const Scalar& b) {
    if (a.isNumeric() && b.isNumeric()) {
        if (a.isInteger() && b.isInteger()) {
            return std::get<std::int64_t>(a.value_) <=> std::get<std::int64_t>(b.value_);
        }
        return a.asDouble() <=> b.asDouble();
    }
    if (a.value_.index() != b.value_.index()) {
        return std::nullopt;
    }
    if (const auto* s = std::get_if<std::string>(&a.value_)) {
        const int c = s->compare(std::get<std::string>(b.value_));
        return c < 0 ? std::partial_ordering::less : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
    }
    return std::get<bool>(a.value_) <=> std::get<bool>(b.value_);
}

std::string Scalar::toString() const { return toJson().dump(); }

nlohmann::json Scalar::toJson() const {
    return std::visit([](const auto& v) { return nlohmann::json(v); }, value_);
}

Scalar Scalar::fromJson(const nlohmann::json& j) {
    if (j.is_boolean()) {
        return Scalar(j.get<bool>());
    }
    if (j.is_number_integer()) {
        return Scalar(j.get<std::int64_t>());
    }
    if (j.is_number_float()) {
        return Scalar(j.get<double>());
    }
    if (j.is_string()) {
        return Scalar(j.get<std::string>());
    }
    throw std::invalid_argument("payload values must be scalars, got " + j.dump());
}

const Scalar* Payload::find(std::string_view name) const {
    auto it = fields_.find(name);
    return it == fields_.end() ? nullptr : &it->second;
}

bool Payload::erase(std::string_view name) {
    auto it = fields_.find(name);
    if (it == fields_.end()) {
        return false;
    }
    fields_.erase(it);
    return true;
}

std::strong_ordering Payload::operator<=>(const Payload& o) const {
    auto a = fields_.begin();
    auto b = o.fields_.begin();
    for (; a != fields_.end() && b != o.fields_.end(); ++a, ++b) {
        if (auto c = a->first <=> b->first; c != 0) {
            return c;
        }
        if (auto c = a->second <=> b->second; c != 0) {
            return c;
        }
    }
    return fields_.size() <=> o.fields_.size();
}

std::string Payload::toString() const { return toJson().dump(); }

nlohmann::json Payload::toJson() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : fields_) {
        j[name] = value.toJson();
    }
    return j;
}

Payload Payload::fromJson(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("payload must be a JSON object");
    }
    Payload p;
    for (const auto& [name, value] : j.items()) {
        p.fields_.emplace(name, Scalar::fromJson(value));
    }
    return p;
}

Payload Payload::concat(const Payload& left, const Payload& right) {
    Payload out;
    for (const auto& [name, value] : left.fields_) {
        out.fields_.emplace(right.fields_.contains(name) ? name + "#l" : name, value);
    }
    for (const auto& [name, value] : right.fields_) {
        out.fields_.emplace(left.fields_.contains(name) ? name + "#r" : name, value);
    }
    return out;
}

Payload Payload::merge(const Payload& left, const Payload& right) {
    Payload out = left;
    for (const auto& [name, value] : right.fields_) {
        out.fields_.emplace(name, value);
    }
    return out;
}

Payload Payload::concatAll(std::initializer_list<const Payload*> parts) {
    std::vector<Payload> copies;
    copies.reserve(parts.size());
    for (const Payload* p : parts) {
        copies.push_back(*p);
    }
    return concatRange(copies.begin(), copies.end());
}

}// namespace cedr
