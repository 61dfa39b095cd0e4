#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gcomp {

/// Flat key = value text document with '#' comments. Keys keep insertion
/// order on write so emitted configs diff cleanly.
class KvFile {
public:
    KvFile() = default;

    static KvFile load(const std::string& path);
    static KvFile parse(const std::string& text);
    void save(const std::string& path) const;
    std::string to_text() const;

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void set_u64(const std::string& key, std::uint64_t value);
    void comment(const std::string& text);  // emitted in place on write

    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    std::vector<std::string> keys() const;

private:
    struct Line {
        bool is_comment = false;
        std::string key;    // empty for comments
        std::string value;  // comment text for comments
    };
    std::vector<Line> lines_;
    std::map<std::string, std::size_t> index_;
};

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

/// Strict double parse of a full token.
double parse_double(const std::string& text, const std::string& context);

}  // namespace gcomp
