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

#include <cedr/disorder.hpp>
#include <cedr/engine.hpp>
#include <cedr/error.hpp>
#include <cedr/jsonl.hpp>
#include <cedr/query.hpp>
#include <cedr/temporal.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace cedr;

constexpr int kOk = 0;
constexpr int kDiagnostics = 1;
constexpr int kIo = 2;
constexpr int kDiffer = 3;

std::string readText(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Timestamp timestampArg(const std::string& text, const std::string& flag) {
    auto t = Timestamp::parse(text);
    if (!t) {
        throw Error(ErrorKind::InvalidArgument, flag + " expects a tick count or inf, got '" + text + "'");
    }
    return *t;
}

/// Writes to `path`, or standard output when empty.
template<typename F>
void withOutput(const std::string& path, F&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    write(out);
}

std::vector<jsonl::StreamItem> readStreamAt(const std::string& path) {
    try {
        return jsonl::readStreamFile(path);
    } catch (const Error& e) {
        std::string message = e.what();
        const std::string prefix = std::string(toString(ErrorKind::Io)) + ": ";
        if (e.kind() == ErrorKind::Io && message.find(path) == std::string::npos) {
            throw Error(ErrorKind::Io, path + ": " + message.substr(prefix.size()));
        }
        throw;
    }
}

/// key = value lines; '#' starts a comment. Keys name long flags without dashes.
std::vector<std::pair<std::string, std::string>> readConfig(const std::string& path) {
    std::istringstream in(readText(path));
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t number = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
            s = s.substr(1, s.size() - 2);
        }
        return s;
    };
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidArgument, path + ":" + std::to_string(number) + ": expected key = value");
        }
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

/// Removes `--config PATH` from the arguments and appends config entries whose flag is absent.
std::vector<std::string> expandConfig(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) {
        return args;
    }
    const auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : readConfig(*path)) {
        const std::string flag = "--" + key;
        if (!given(flag)) {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

struct RunOptions {
    std::string query;
    std::vector<std::string> inputs;
    std::string level = "strong";
    std::string memory;
    std::string block;
    std::string tickUnit = "minute";
    std::string output;
    std::string metrics;
};

plan::Node compileQuery(const std::string& path, const std::string& tickUnit) {
    const std::string text = readText(path);
    auto parsed = query::parse(text);
    if (!parsed.ok()) {
        std::string message;
        for (const auto& d : parsed.diagnostics) {
            message += (message.empty() ? "" : "\n") + path + ":" + d.toString();
        }
        throw Error(ErrorKind::CompileError, "query has errors\n" + message);
    }
    return query::compile(*parsed.query, {query::parseTickUnit(tickUnit)});
}

int cmdRun(const RunOptions& o) {
    const plan::Node plan = compileQuery(o.query, o.tickUnit);
    engine::ConsistencyLevel level = engine::ConsistencyLevel::named(o.level);
    level = engine::ConsistencyLevel::of(o.memory.empty() ? level.memory : timestampArg(o.memory, "--memory"),
                                         o.block.empty() ? level.blocking : timestampArg(o.block, "--block"));
    engine::Pipeline pipeline(plan, level);

    struct Arrival {
        Timestamp at;
        std::size_t file;
        std::size_t position;
        std::string stream;
        jsonl::StreamItem item;
    };
    std::vector<Arrival> arrivals;
    std::set<std::string> provided;
    for (std::size_t f = 0; f < o.inputs.size(); ++f) {
        const auto eq = o.inputs[f].find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorKind::InvalidArgument, "--input expects name=path, got '" + o.inputs[f] + "'");
        }
        const std::string stream = o.inputs[f].substr(0, eq);
        provided.insert(stream);
        Timestamp last = Timestamp::zero();
        auto items = readStreamAt(o.inputs[f].substr(eq + 1));
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (items[i].kind == jsonl::StreamItem::Kind::Row) {
                last = items[i].row.arrival.start;
            }
            arrivals.push_back({last, f, i, stream, std::move(items[i])});
        }
    }
    for (const auto& s : pipeline.streams()) {
        if (!provided.contains(s)) {
            throw Error(ErrorKind::InvalidArgument, "query reads stream '" + s + "' but no --input " + s + "=PATH was given");
        }
    }
    std::stable_sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
        return std::tie(a.at, a.file, a.position) < std::tie(b.at, b.file, b.position);
    });

    std::vector<std::pair<std::size_t, Timestamp>> guaranteeMarks;
    const auto note = [&]() {
        const auto& gs = pipeline.outputGuarantees();
        while (guaranteeMarks.size() < gs.size()) {
            guaranteeMarks.emplace_back(pipeline.output().size(), gs[guaranteeMarks.size()]);
        }
    };
    const auto streams = pipeline.streams();
    for (auto& a : arrivals) {
        if (!streams.contains(a.stream)) {
            continue;
        }
        if (a.item.kind == jsonl::StreamItem::Kind::Row) {
            pipeline.ingest(a.stream, std::move(a.item.row));
        } else {
            pipeline.declareGuarantee({a.stream, a.item.guarantee});
        }
        note();
    }
    pipeline.finish();
    note();

    std::vector<jsonl::StreamItem> out;
    std::size_t mark = 0;
    const auto& rows = pipeline.output();
    for (std::size_t i = 0; i <= rows.size(); ++i) {
        while (mark < guaranteeMarks.size() && guaranteeMarks[mark].first == i) {
            out.push_back(jsonl::StreamItem::ofGuarantee(guaranteeMarks[mark++].second));
        }
        if (i < rows.size()) {
            out.push_back(jsonl::StreamItem::ofRow(rows[i]));
        }
    }
    withOutput(o.output, [&](std::ostream& os) { jsonl::writeStream(os, out); });
    const std::string metrics = pipeline.metrics().toJson().dump(2);
    if (o.metrics.empty()) {
        std::cerr << metrics << '\n';
    } else {
        withOutput(o.metrics, [&](std::ostream& os) { os << metrics << '\n'; });
    }
    return kOk;
}

struct DisorderOptions {
    std::string input;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::size_t skew = 0;
    double retractProb = 0.0;
    bool guarantees = false;
};

int cmdDisorder(const DisorderOptions& o) {
    if (!o.seed) {
        throw Error(ErrorKind::InvalidArgument, "disorder requires --seed");
    }
    const auto path = o.input.substr(o.input.find('=') == std::string::npos ? 0 : o.input.find('=') + 1);
    const auto rows = disorder::rowsOf(readStreamAt(path));
    const auto out = disorder::apply(rows, {*o.seed, o.skew, o.retractProb, o.guarantees});
    withOutput(o.output, [&](std::ostream& os) { jsonl::writeStream(os, out); });
    return kOk;
}

CanonicalMode modeArg(const std::string& mode) {
    if (mode == "to" || mode == "TO") {
        return CanonicalMode::To;
    }
    if (mode == "at" || mode == "AT") {
        return CanonicalMode::At;
    }
    throw Error(ErrorKind::InvalidArgument, "--mode expects to or at, got '" + mode + "'");
}

int cmdCanon(const std::string& input, const std::string& t0, const std::string& mode, const std::string& output) {
    const auto table = jsonl::tableOf(readStreamAt(input));
    const Timestamp t = timestampArg(t0, "--t0");
    const auto canonical = modeArg(mode) == CanonicalMode::To ? canonicalTo(table, t) : canonicalAt(table, t);
    std::vector<jsonl::StreamItem> items;
    for (const auto& r : canonical) {
        items.push_back(jsonl::StreamItem::ofRow(r));
    }
    withOutput(output, [&](std::ostream& os) { jsonl::writeStream(os, items); });
    return kOk;
}

int cmdEquiv(const std::string& a, const std::string& b, const std::string& t0, const std::string& mode) {
    const auto left = jsonl::tableOf(readStreamAt(a));
    const auto right = jsonl::tableOf(readStreamAt(b));
    const bool same = logicallyEquivalent(left, right, timestampArg(t0, "--t0"), modeArg(mode));
    std::cout << (same ? "equivalent" : "different") << '\n';
    return same ? kOk : kDiffer;
}

int cmdParse(const std::string& path, bool showPlan, const std::string& tickUnit, const std::string& output) {
    const std::string text = readText(path);
    const auto parsed = query::parse(text);
    for (const auto& d : parsed.diagnostics) {
        std::cerr << path << ":" << d.toString() << '\n';
    }
    if (!parsed.ok()) {
        return kDiagnostics;
    }
    const auto dump = showPlan ? plan::toJson(query::compile(*parsed.query, {query::parseTickUnit(tickUnit)})).dump(2)
                               : query::toJson(*parsed.query).dump(2);
    withOutput(output, [&](std::ostream& os) { os << dump << '\n'; });
    return kOk;
}

}// namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal event stream processor: run queries, simulate disorder, compare streams"};
    app.require_subcommand(1);

    RunOptions run;
    auto* runCmd = app.add_subcommand("run", "Execute a query over input streams");
    runCmd->add_option("--query", run.query, "Query file")->required();
    runCmd->add_option("--input", run.inputs, "Input stream as name=path (repeatable)")->required();
    runCmd->add_option("--level", run.level, "strong, middle or weak")->check(CLI::IsMember({"strong", "middle", "weak"}));
    runCmd->add_option("--memory", run.memory, "Memory limit M in ticks, or inf");
    runCmd->add_option("--block", run.block, "Blocking limit B in ticks, or inf");
    runCmd->add_option("--tick-unit", run.tickUnit, "Length of one tick, e.g. minute or 30 seconds");
    runCmd->add_option("--output", run.output, "Output stream file (default: standard output)");
    runCmd->add_option("--metrics", run.metrics, "Metrics JSON file (default: standard error)");
    std::uint64_t unusedSeed = 0;
    runCmd->add_option("--seed", unusedSeed, "Accepted for configuration symmetry; runs are deterministic");

    DisorderOptions dis;
    auto* disCmd = app.add_subcommand("disorder", "Re-encode a stream with bounded disorder and retractions");
    disCmd->add_option("--input", dis.input, "Input stream file")->required();
    disCmd->add_option("--seed", dis.seed, "Random seed (required)");
    disCmd->add_option("--skew", dis.skew, "Maximum displacement in positions");
    disCmd->add_option("--retract-prob", dis.retractProb, "Probability of an optimistic wrong insert per row")->check(CLI::Range(0.0, 1.0));
    disCmd->add_flag("--guarantees", dis.guarantees, "Interleave honest occurrence-time guarantees");
    disCmd->add_option("--output", dis.output, "Output file (default: standard output)");

    std::string canonInput, canonT0 = "inf", canonMode = "to", canonOutput;
    auto* canonCmd = app.add_subcommand("canon", "Print the canonical history table");
    canonCmd->add_option("--input", canonInput, "Stream file")->required();
    canonCmd->add_option("--t0", canonT0, "Occurrence time, or inf");
    canonCmd->add_option("--mode", canonMode, "to or at");
    canonCmd->add_option("--output", canonOutput, "Output file (default: standard output)");

    std::string equivA, equivB, equivT0 = "inf", equivMode = "to";
    auto* equivCmd = app.add_subcommand("equiv", "Check logical equivalence of two streams (exit 3 when they differ)");
    equivCmd->add_option("a", equivA, "First stream file")->required();
    equivCmd->add_option("b", equivB, "Second stream file")->required();
    equivCmd->add_option("--t0", equivT0, "Occurrence time, or inf");
    equivCmd->add_option("--mode", equivMode, "to or at");

    std::string parseQuery, parseTick = "minute", parseOutput;
    bool parsePlan = false;
    auto* parseCmd = app.add_subcommand("parse", "Parse a query and print its syntax tree");
    parseCmd->add_option("--query", parseQuery, "Query file")->required();
    parseCmd->add_flag("--plan", parsePlan, "Print the compiled plan instead");
    parseCmd->add_option("--tick-unit", parseTick, "Length of one tick, e.g. minute or 30 seconds");
    parseCmd->add_option("--output", parseOutput, "Output file (default: standard output)");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expandConfig(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kDiagnostics;
    } catch (const cedr::Error& e) {
        std::cerr << "cedr: " << e.what() << '\n';
        return e.kind() == cedr::ErrorKind::Io ? kIo : kDiagnostics;
    }

    try {
        if (*runCmd) {
            return cmdRun(run);
        }
        if (*disCmd) {
            return cmdDisorder(dis);
        }
        if (*canonCmd) {
            return cmdCanon(canonInput, canonT0, canonMode, canonOutput);
        }
        if (*equivCmd) {
            return cmdEquiv(equivA, equivB, equivT0, equivMode);
        }
        if (*parseCmd) {
            return cmdParse(parseQuery, parsePlan, parseTick, parseOutput);
        }
    } catch (const cedr::Error& e) {
        std::cerr << "cedr: " << e.what() << '\n';
        return e.kind() == cedr::ErrorKind::Io ? kIo : kDiagnostics;
    } catch (const std::exception& e) {
        std::cerr << "cedr: " << e.what() << '\n';
        return kDiagnostics;
    }
    return kDiagnostics;
}
