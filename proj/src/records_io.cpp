#include "eigenshift/harness.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eigenshift::harness {

namespace {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& s, const std::string& where) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw std::runtime_error(where + ": not a number: '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') throw std::runtime_error(where + ": not an integer: '" + s + "'");
    return v;
}

unsigned long long parse_uint(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || *end != '\0') throw std::runtime_error(where + ": not an unsigned integer: '" + s + "'");
    return v;
}

// Field accessors, one per column, in declaration order.
struct Column {
    const char* name;
    std::string (*write)(const TrialRecord&);
    void (*read)(TrialRecord&, const std::string&, const std::string&);
};

#define REAL_COLUMN(f)                                                                          \
    Column {                                                                                    \
        #f, [](const TrialRecord& r) { return format_real(r.f); },                              \
            [](TrialRecord& r, const std::string& s, const std::string& w) { r.f = parse_real(s, w); } \
    }
#define INT_COLUMN(f)                                                                           \
    Column {                                                                                    \
        #f, [](const TrialRecord& r) { return std::to_string(r.f); },                           \
            [](TrialRecord& r, const std::string& s, const std::string& w) {                    \
                r.f = static_cast<decltype(r.f)>(parse_int(s, w));                              \
            }                                                                                   \
    }

const std::vector<Column>& columns() {
    static const std::vector<Column> cols = {
        INT_COLUMN(trial),
        Column{"seed", [](const TrialRecord& r) { return std::to_string(r.seed); },
               [](TrialRecord& r, const std::string& s, const std::string& w) { r.seed = parse_uint(s, w); }},
        INT_COLUMN(point),
        REAL_COLUMN(param),
        Column{"model", [](const TrialRecord& r) { return r.model; },
               [](TrialRecord& r, const std::string& s, const std::string&) { r.model = s; }},
        INT_COLUMN(failed),
        REAL_COLUMN(distance_sq),
        REAL_COLUMN(dk_hs),
        REAL_COLUMN(dk_op),
        REAL_COLUMN(delta),
        REAL_COLUMN(first_order_hs_sq),
        REAL_COLUMN(remainder_bound),
        INT_COLUMN(remainder_ok),
        REAL_COLUMN(x_measured),
        REAL_COLUMN(rank_I),
        REAL_COLUMN(thm2_condition),
        REAL_COLUMN(thm2_bound),
        INT_COLUMN(thm2_applicable),
        REAL_COLUMN(refined_bound),
        REAL_COLUMN(thm3_condition),
        REAL_COLUMN(thm3_bound),
        INT_COLUMN(thm3_applicable),
        REAL_COLUMN(thm4_condition),
        REAL_COLUMN(thm4_bound),
        INT_COLUMN(thm4_applicable),
        INT_COLUMN(separation_ok),
        INT_COLUMN(contraction_ok),
        REAL_COLUMN(stat),
        REAL_COLUMN(lambda_hat_max),
        REAL_COLUMN(lambda_hat_min),
    };
    return cols;
}

#undef REAL_COLUMN
#undef INT_COLUMN

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing: " + std::strerror(errno));
    out << text;
    if (!out) throw std::runtime_error("write to " + path + " failed: " + std::strerror(errno));
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json real_to_json(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

double real_from_json(const json& j) {
    if (j.is_string()) return parse_real(j.get<std::string>(), "summary");
    return j.get<double>();
}

}  // namespace

const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& c : columns()) v.emplace_back(c.name);
        return v;
    }();
    return names;
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
    std::string out = join(record_columns()) + "\n";
    std::vector<std::string> cells;
    for (const auto& r : records) {
        if (r.model.find_first_of(",\n\r\"") != std::string::npos)
            throw std::invalid_argument("records_to_csv: model name contains a separator: " + r.model);
        cells.clear();
        for (const auto& c : columns()) cells.push_back(c.write(r));
        out += join(cells) + "\n";
    }
    return out;
}

std::vector<TrialRecord> records_from_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty file, expected a header row");
    if (split_line(line) != record_columns())
        throw std::runtime_error(origin + ": header does not match the record columns");
    std::vector<TrialRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != columns().size())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(columns().size()) + " fields, got " + std::to_string(cells.size()));
        TrialRecord r;
        for (std::size_t k = 0; k < cells.size(); ++k)
            columns()[k].read(r, cells[k], origin + ":" + std::to_string(lineno) + ":" + columns()[k].name);
        out.push_back(std::move(r));
    }
    return out;
}

void write_records(const std::vector<TrialRecord>& records, const std::string& path) {
    write_text(records_to_csv(records), path);
}

std::vector<TrialRecord> read_records(const std::string& path) { return records_from_csv(read_text(path), path); }

std::int64_t StudySummary::total_violations() const {
    std::int64_t n = 0;
    for (const auto& [name, count] : violations) n += count;
    return n;
}

bool StudySummary::checks_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

json summary_to_json(const StudySummary& s) {
    json j;
    j["study"] = s.study;
    j["config"] = s.config;
    j["trials"] = s.trials;
    j["failed"] = s.failed;
    j["violations"] = s.violations;
    json metrics = json::object();
    for (const auto& [k, v] : s.metrics) metrics[k] = real_to_json(v);
    j["metrics"] = metrics;
    json series = json::array();
    for (const auto& ser : s.series) {
        json xs = json::array(), ys = json::array();
        for (double v : ser.x) xs.push_back(real_to_json(v));
        for (double v : ser.y) ys.push_back(real_to_json(v));
        series.push_back({{"name", ser.name}, {"x", xs}, {"y", ys}});
    }
    j["series"] = series;
    json checks = json::array();
    for (const auto& c : s.checks)
        checks.push_back({{"name", c.name},
                          {"value", real_to_json(c.value)},
                          {"lo", real_to_json(c.lo)},
                          {"hi", real_to_json(c.hi)},
                          {"pass", c.pass}});
    j["checks"] = checks;
    j["warnings"] = s.warnings;
    return j;
}

StudySummary summary_from_json(const json& j) {
    StudySummary s;
    s.study = j.at("study").get<std::string>();
    s.config = j.at("config");
    s.trials = j.at("trials").get<std::int64_t>();
    s.failed = j.at("failed").get<std::int64_t>();
    s.violations = j.at("violations").get<std::map<std::string, std::int64_t>>();
    for (const auto& [k, v] : j.at("metrics").items()) s.metrics[k] = real_from_json(v);
    for (const auto& e : j.at("series")) {
        Series ser;
        ser.name = e.at("name").get<std::string>();
        for (const auto& v : e.at("x")) ser.x.push_back(real_from_json(v));
        for (const auto& v : e.at("y")) ser.y.push_back(real_from_json(v));
        s.series.push_back(std::move(ser));
    }
    for (const auto& e : j.at("checks")) {
        Check c;
        c.name = e.at("name").get<std::string>();
        c.value = real_from_json(e.at("value"));
        c.lo = real_from_json(e.at("lo"));
        c.hi = real_from_json(e.at("hi"));
        c.pass = e.at("pass").get<bool>();
        s.checks.push_back(std::move(c));
    }
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

void write_summary(const StudySummary& summary, const std::string& path) {
    write_text(summary_to_json(summary).dump(2) + "\n", path);
}

StudySummary read_summary(const std::string& path) {
    const std::string text = read_text(path);
    try {
        return summary_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": invalid summary: " + e.what());
    }
}

}  // namespace eigenshift::harness
