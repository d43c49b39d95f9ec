#include "linkfp/kvfile.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "linkfp/errors.hpp"

namespace linkfp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

const KvEntry* KvSection::find(const std::string& key) const {
    for (const auto& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

std::vector<const KvEntry*> KvSection::all(const std::string& key) const {
    std::vector<const KvEntry*> out;
    for (const auto& e : entries)
        if (e.key == key) out.push_back(&e);
    return out;
}

std::optional<std::string> KvSection::value(const std::string& key) const {
    const KvEntry* e = find(key);
    if (!e) return std::nullopt;
    return e->value;
}

const KvSection* KvFile::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

std::vector<const KvSection*> KvFile::all(const std::string& name) const {
    std::vector<const KvSection*> out;
    for (const auto& s : sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

KvFile KvFile::parse_string(const std::string& text, const std::string& origin) {
    KvFile out;
    out.origin = origin;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail(origin, lineno, "empty section name");
            out.sections.push_back(KvSection{name, lineno, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(origin, lineno, "empty key");
        if (out.sections.empty()) fail(origin, lineno, "key outside any [section]");
        out.sections.back().entries.push_back(KvEntry{key, value, lineno});
    }
    return out;
}

double kv_double(const KvFile& f, const KvEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE)
        fail(f.origin, e.line, "key '" + e.key + "': not a number: '" + e.value + "'");
    return v;
}

std::int64_t kv_int(const KvFile& f, const KvEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE)
        fail(f.origin, e.line, "key '" + e.key + "': not an integer: '" + e.value + "'");
    return v;
}

std::uint64_t kv_uint(const KvFile& f, const KvEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE || e.value.find('-') != std::string::npos)
        fail(f.origin, e.line, "key '" + e.key + "': not an unsigned integer: '" + e.value + "'");
    return v;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        const std::string t = trim(cur);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace linkfp
