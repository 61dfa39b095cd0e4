#include "gcomp/kv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gcomp/errors.hpp"

namespace gcomp {

namespace {
std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
}  // namespace

KvFile KvFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

KvFile KvFile::parse(const std::string& text) {
    KvFile kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            kv.lines_.push_back({true, "", t.substr(1)});
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("malformed config line " + std::to_string(lineno) + ": " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw InputError("empty key on config line " + std::to_string(lineno));
        if (kv.index_.count(key))
            throw InputError("duplicate config key: " + key);
        kv.index_[key] = kv.lines_.size();
        kv.lines_.push_back({false, key, value});
    }
    return kv;
}

void KvFile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << to_text();
    if (!out) throw InputError("write failed: " + path);
}

std::string KvFile::to_text() const {
    std::string out;
    for (const auto& l : lines_) {
        if (l.is_comment)
            out += "#" + l.value + "\n";
        else
            out += l.key + " = " + l.value + "\n";
    }
    return out;
}

bool KvFile::has(const std::string& key) const { return index_.count(key) > 0; }

void KvFile::set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it != index_.end()) {
        lines_[it->second].value = value;
        return;
    }
    index_[key] = lines_.size();
    lines_.push_back({false, key, value});
}

void KvFile::set(const std::string& key, double value) { set(key, format_double(value)); }
void KvFile::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
void KvFile::set_u64(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
void KvFile::comment(const std::string& text) { lines_.push_back({true, "", " " + text}); }

const std::string& KvFile::get(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw InputError("missing config key: " + key);
    return lines_[it->second].value;
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
    auto it = index_.find(key);
    return it == index_.end() ? fallback : lines_[it->second].value;
}

double KvFile::get_double(const std::string& key) const {
    return parse_double(get(key), "config key " + key);
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t KvFile::get_int(const std::string& key) const {
    const std::string& v = get(key);
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw InputError("config key " + key + " is not an integer: " + v);
    return out;
}

std::int64_t KvFile::get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t KvFile::get_u64_or(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw InputError("config key " + key + " is not an unsigned integer: " + v);
    return out;
}

bool KvFile::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InputError("config key " + key + " is not a boolean: " + v);
}

std::vector<std::string> KvFile::keys() const {
    std::vector<std::string> out;
    for (const auto& l : lines_)
        if (!l.is_comment) out.push_back(l.key);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericError("format_double failed");
    return std::string(buf, p);
}

double parse_double(const std::string& text, const std::string& context) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || p != text.data() + text.size())
        throw InputError(context + ": not a number: '" + text + "'");
    return out;
}

}  // namespace gcomp
