#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linkfp {

// Sectioned key=value text, the config surface of the tool:
//
//   # comment
//   [section]
//   key = value
//   key = value        (keys may repeat; order preserved)
//
// Sections may repeat too; parsing keeps file order. Lines beginning with
// '#' or ';' are comments. Values are whitespace-trimmed, otherwise verbatim.

struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct KvSection {
    std::string name;
    int line = 0;
    std::vector<KvEntry> entries;

    const KvEntry* find(const std::string& key) const;
    std::vector<const KvEntry*> all(const std::string& key) const;
    std::optional<std::string> value(const std::string& key) const;
};

struct KvFile {
    std::string origin;  // file name, used in diagnostics
    std::vector<KvSection> sections;

    const KvSection* find(const std::string& name) const;
    std::vector<const KvSection*> all(const std::string& name) const;

    static KvFile parse_file(const std::string& path);
    static KvFile parse_string(const std::string& text, const std::string& origin);
};

// Typed accessors; throw ParseError naming origin/line/key on bad input.
double kv_double(const KvFile& f, const KvEntry& e);
std::int64_t kv_int(const KvFile& f, const KvEntry& e);
std::uint64_t kv_uint(const KvFile& f, const KvEntry& e);

// Comma-separated list helper ("1,5,10" -> {1,5,10}).
std::vector<std::string> split_csv_list(const std::string& s);

}  // namespace linkfp
