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

#ifndef CEDR_JSONL_HPP_
#define CEDR_JSONL_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include <cedr/events.hpp>

namespace cedr::jsonl {

/// One line of a stream file: either a row or a provider-declared occurrence-time guarantee.
struct StreamItem {
    enum class Kind { Row, Guarantee };
    Kind kind = Kind::Row;
    TritemporalEvent row;
    Timestamp guarantee;

    static StreamItem ofRow(TritemporalEvent r) { return {Kind::Row, std::move(r), {}}; }
    static StreamItem ofGuarantee(Timestamp t) { return {Kind::Guarantee, {}, t}; }
};

Timestamp timestampFromJson(const nlohmann::json& j);
nlohmann::ordered_json timestampToJson(Timestamp t);

/// {"k","id","vs","ve","os","oe","cs","ce","payload"} plus optional "rt" and "cbt".
/// A missing "ce" defaults to inf.
TritemporalEvent rowFromJson(const nlohmann::json& j);
nlohmann::ordered_json rowToJson(const TritemporalEvent& row);

/// {"id","vs","ve","payload"}
UnitemporalEvent unitemporalFromJson(const nlohmann::json& j);
nlohmann::ordered_json unitemporalToJson(const UnitemporalEvent& e);

/// Parses a JSON-lines stream. Blank lines are skipped; `{"guarantee": t}` lines become
/// guarantee items. Throws Error(Io) naming the 1-based line of the first malformed line.
std::vector<StreamItem> readStream(std::istream& in);
std::vector<StreamItem> readStreamFile(const std::string& path);

void writeStream(std::ostream& out, const std::vector<StreamItem>& items);
void writeStreamFile(const std::string& path, const std::vector<StreamItem>& items);

/// Rows only, guarantees dropped.
HistoryTable tableOf(const std::vector<StreamItem>& items);

UnitemporalTable readUnitemporal(std::istream& in);
void writeUnitemporal(std::ostream& out, const UnitemporalTable& table);

}// namespace cedr::jsonl

#endif// CEDR_JSONL_HPP_
