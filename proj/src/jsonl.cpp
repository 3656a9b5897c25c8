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
#include <cedr/jsonl.hpp>

#include <fstream>
#include <istream>
#include <ostream>

namespace cedr::jsonl {

using nlohmann::json;
using nlohmann::ordered_json;

Timestamp timestampFromJson(const json& j) {
    if (j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        return Timestamp(j.get<std::uint64_t>());
    }
    if (j.is_string()) {
        if (auto t = Timestamp::parse(j.get<std::string>())) {
            return *t;
        }
    }
    throw std::invalid_argument("bad timestamp " + j.dump());
}

ordered_json timestampToJson(Timestamp t) {
    if (t.isInfinite()) {
        return "inf";
    }
    return t.ticks();
}

namespace {
Timestamp required(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw std::invalid_argument(std::string("missing field \"") + key + "\"");
    }
    return timestampFromJson(*it);
}

Timestamp optionalTs(const json& j, const char* key, Timestamp fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : timestampFromJson(*it);
}

std::string requiredText(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw std::invalid_argument(std::string("missing text field \"") + key + "\"");
    }
    return it->get<std::string>();
}
}// namespace

TritemporalEvent rowFromJson(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("row must be a JSON object");
    }
    TritemporalEvent row;
    row.lineage = requiredText(j, "k");
    row.id = requiredText(j, "id");
    row.valid = {required(j, "vs"), required(j, "ve")};
    row.occurrence = {required(j, "os"), required(j, "oe")};
    row.arrival = {optionalTs(j, "cs", Timestamp::zero()), optionalTs(j, "ce", kInfinity)};
    if (auto it = j.find("payload"); it != j.end()) {
        row.payload = Payload::fromJson(*it);
    }
    if (auto it = j.find("rt"); it != j.end()) {
        row.rootTime = timestampFromJson(*it);
    }
    if (auto it = j.find("cbt"); it != j.end()) {
        row.contributors = it->get<std::vector<std::string>>();
    }
    if (row.occurrence.start > row.occurrence.end) {
        throw std::invalid_argument("occurrence start after occurrence end");
    }
    return row;
}

ordered_json rowToJson(const TritemporalEvent& row) {
    ordered_json j;
    j["k"] = row.lineage;
    j["id"] = row.id;
    j["vs"] = timestampToJson(row.valid.start);
    j["ve"] = timestampToJson(row.valid.end);
    j["os"] = timestampToJson(row.occurrence.start);
    j["oe"] = timestampToJson(row.occurrence.end);
    j["cs"] = timestampToJson(row.arrival.start);
    j["ce"] = timestampToJson(row.arrival.end);
    if (row.rootTime) {
        j["rt"] = timestampToJson(*row.rootTime);
    }
    if (!row.contributors.empty()) {
        j["cbt"] = row.contributors;
    }
    j["payload"] = ordered_json::parse(row.payload.toJson().dump());
    return j;
}

UnitemporalEvent unitemporalFromJson(const json& j) {
    UnitemporalEvent e;
    e.id = requiredText(j, "id");
    e.valid = {required(j, "vs"), required(j, "ve")};
    if (auto it = j.find("payload"); it != j.end()) {
        e.payload = Payload::fromJson(*it);
    }
    return e;
}

ordered_json unitemporalToJson(const UnitemporalEvent& e) {
    ordered_json j;
    j["id"] = e.id;
    j["vs"] = timestampToJson(e.valid.start);
    j["ve"] = timestampToJson(e.valid.end);
    j["payload"] = ordered_json::parse(e.payload.toJson().dump());
    return j;
}

namespace {
template<typename F>
void forEachLine(std::istream& in, F&& f) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            f(json::parse(line));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::Io, "line " + std::to_string(number) + ": " + e.what());
        }
    }
}
}// namespace

std::vector<StreamItem> readStream(std::istream& in) {
    std::vector<StreamItem> items;
    forEachLine(in, [&](const json& j) {
        if (j.is_object() && j.size() == 1 && j.contains("guarantee")) {
            items.push_back(StreamItem::ofGuarantee(timestampFromJson(j["guarantee"])));
        } else {
            items.push_back(StreamItem::ofRow(rowFromJson(j)));
        }
    });
    return items;
}

std::vector<StreamItem> readStreamFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    return readStream(in);
}

void writeStream(std::ostream& out, const std::vector<StreamItem>& items) {
    for (const auto& item : items) {
        if (item.kind == StreamItem::Kind::Guarantee) {
            ordered_json j;
            j["guarantee"] = timestampToJson(item.guarantee);
            out << j.dump() << '\n';
        } else {
            out << rowToJson(item.row).dump() << '\n';
        }
    }
}

void writeStreamFile(const std::string& path, const std::vector<StreamItem>& items) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    writeStream(out, items);
    if (!out) {
        throw Error(ErrorKind::Io, "write failed for " + path);
    }
}

HistoryTable tableOf(const std::vector<StreamItem>& items) {
    std::vector<TritemporalEvent> rows;
    for (const auto& item : items) {
        if (item.kind == StreamItem::Kind::Row) {
            rows.push_back(item.row);
        }
    }
    return HistoryTable(std::move(rows));
}

UnitemporalTable readUnitemporal(std::istream& in) {
    UnitemporalTable table;
    forEachLine(in, [&](const json& j) { table.push_back(unitemporalFromJson(j)); });
    return table;
}

void writeUnitemporal(std::ostream& out, const UnitemporalTable& table) {
    for (const auto& e : table) {
        out << unitemporalToJson(e).dump() << '\n';
    }
}

}// namespace cedr::jsonl
