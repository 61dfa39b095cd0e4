#include "gcomp/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gcomp/kv.hpp"

namespace gcomp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

bool parse_int_strict(const std::string& s, long long& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double_strict(const std::string& s, double& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

struct RawRow {
    std::string id;
    int time = 0;
    std::string arm;
    std::string y;
    std::vector<std::string> z;
    std::vector<std::string> x;
    std::string b, d, c;
    std::size_t lineno = 0;
};

double numeric_cell(const std::string& cell, const std::string& col, std::size_t lineno) {
    if (cell.empty()) return kAbsent;
    double v = 0.0;
    if (!parse_double_strict(cell, v))
        throw InputError("non-numeric value '" + cell + "' in column " + col + " at line " +
                         std::to_string(lineno));
    return v;
}

int binary_cell(const std::string& cell, const std::string& col, std::size_t lineno) {
    if (cell.empty()) return -1;
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw InputError("column " + col + " must be 0/1/empty, got '" + cell + "' at line " +
                     std::to_string(lineno));
}

}  // namespace

bool LongitudinalDataset::has_true_compliance() const {
    for (const auto& p : participants)
        for (const auto& o : p.obs)
            if (o.time >= 1 && !o.missing && o.c < 0) return false;
    return !participants.empty();
}

std::vector<std::string> LongitudinalDataset::arms() const {
    std::set<std::string> s;
    for (const auto& p : participants) s.insert(p.arm);
    return std::vector<std::string>(s.begin(), s.end());
}

LongitudinalDataset load_dataset(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw InputError("empty dataset file: " + path);
    std::vector<std::string> header = split_csv_line(header_line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (col.count(header[i])) throw InputError("duplicate column name: " + header[i]);
        col[header[i]] = i;
    }
    auto require = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw InputError("missing required column: " + name);
        return it->second;
    };
    const std::size_t ci = require(schema.id);
    const std::size_t ct = require(schema.time);
    const std::size_t ca = require(schema.arm);
    const std::size_t cy = require(schema.y);
    const std::size_t cb = require(schema.b);
    const std::size_t cd = require(schema.d);
    std::vector<std::size_t> cz, cx;
    for (const auto& name : schema.z_cols) cz.push_back(require(name));
    for (const auto& name : schema.x_cols) cx.push_back(require(name));
    const bool has_c = col.count(schema.c) > 0;
    const std::size_t cc = has_c ? col[schema.c] : 0;

    std::vector<RawRow> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw InputError("line " + std::to_string(lineno) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(header.size()));
        RawRow r;
        r.lineno = lineno;
        r.id = cells[ci];
        long long t = 0;
        if (!parse_int_strict(cells[ct], t) || t < 0)
            throw InputError("bad time index '" + cells[ct] + "' at line " + std::to_string(lineno));
        r.time = static_cast<int>(t);
        r.arm = cells[ca];
        r.y = cells[cy];
        for (std::size_t k : cz) r.z.push_back(cells[k]);
        for (std::size_t k : cx) r.x.push_back(cells[k]);
        r.b = cells[cb];
        r.d = cells[cd];
        if (has_c) r.c = cells[cc];
        if (r.id.empty()) throw InputError("empty id at line " + std::to_string(lineno));
        rows.push_back(std::move(r));
    }

    // Categorical x columns: any non-parsing cell makes the column
    // categorical; levels are ordered lexicographically, first level dropped.
    const std::size_t nx = schema.x_cols.size();
    std::vector<bool> x_is_categorical(nx, false);
    std::vector<std::set<std::string>> x_levels(nx);
    for (const auto& r : rows)
        for (std::size_t k = 0; k < nx; ++k) {
            double tmp;
            if (!r.x[k].empty() && !parse_double_strict(r.x[k], tmp)) x_is_categorical[k] = true;
        }
    for (const auto& r : rows)
        for (std::size_t k = 0; k < nx; ++k)
            if (x_is_categorical[k] && !r.x[k].empty()) x_levels[k].insert(r.x[k]);

    LongitudinalDataset ds;
    for (std::size_t k = 0; k < nx; ++k) {
        if (!x_is_categorical[k]) {
            ds.x_names.push_back(schema.x_cols[k]);
            continue;
        }
        if (x_levels[k].size() < 2)
            throw InputError("categorical column " + schema.x_cols[k] + " has fewer than 2 levels");
        bool first = true;
        for (const auto& level : x_levels[k]) {
            if (first) {  // reference level dropped
                first = false;
                continue;
            }
            ds.x_names.push_back(schema.x_cols[k] + "=" + level);
        }
    }
    ds.z_names = schema.z_cols;

    // Group by id. Sort ids numerically when every id is an integer so that
    // participant order (and thus baseline sampling) is file-order invariant.
    std::map<std::string, std::vector<const RawRow*>> by_id;
    for (const auto& r : rows) by_id[r.id].push_back(&r);
    std::vector<std::string> ids;
    for (const auto& [id, _] : by_id) ids.push_back(id);
    bool all_numeric = true;
    for (const auto& id : ids) {
        long long tmp;
        if (!parse_int_strict(id, tmp)) all_numeric = false;
    }
    if (all_numeric) {
        std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
            long long va = 0, vb = 0;
            parse_int_strict(a, va);
            parse_int_strict(b, vb);
            return va != vb ? va < vb : a < b;
        });
    }

    int max_time = 0;
    for (const auto& id : ids) {
        auto& group = by_id[id];
        std::sort(group.begin(), group.end(),
                  [](const RawRow* a, const RawRow* b) { return a->time < b->time; });
        Participant p;
        p.id = id;
        p.arm = group.front()->arm;
        int prev_time = -1;
        for (const RawRow* r : group) {
            if (r->time == prev_time)
                throw InputError("duplicate (id, time) pair: (" + id + ", " +
                                 std::to_string(r->time) + ")");
            prev_time = r->time;
            if (r->arm != p.arm)
                throw InputError("participant " + id + " has inconsistent arm labels");
            Observation o;
            o.time = r->time;
            o.y = numeric_cell(r->y, "y", r->lineno);
            for (std::size_t k = 0; k < r->z.size(); ++k)
                o.z.push_back(numeric_cell(r->z[k], schema.z_cols[k], r->lineno));
            o.b = numeric_cell(r->b, "b", r->lineno);
            o.d = binary_cell(r->d, "d", r->lineno);
            o.c = r->c.empty() ? -1 : binary_cell(r->c, "c", r->lineno);
            if (o.time == 0 && (!is_absent(o.b) || o.d >= 0))
                throw InputError("participant " + id + ": biomarker/self-report present at baseline");
            bool any_z_absent = false;
            for (double zv : o.z) any_z_absent = any_z_absent || is_absent(zv);
            o.missing = is_absent(o.y) || any_z_absent ||
                        (o.time >= 1 && (is_absent(o.b) || o.d < 0));
            max_time = std::max(max_time, o.time);
            p.obs.push_back(std::move(o));
        }
        // Encode x from the first row with a complete x record.
        std::vector<double> x_enc;
        const RawRow* src = group.front();
        for (std::size_t k = 0, out = 0; k < nx; ++k) {
            if (!x_is_categorical[k]) {
                x_enc.push_back(numeric_cell(src->x[k], schema.x_cols[k], src->lineno));
                ++out;
                continue;
            }
            bool first = true;
            for (const auto& level : x_levels[k]) {
                if (first) {
                    first = false;
                    continue;
                }
                x_enc.push_back(src->x[k] == level ? 1.0 : 0.0);
                ++out;
            }
        }
        for (const RawRow* r : group)
            for (std::size_t k = 0; k < nx; ++k)
                if (r->x[k] != src->x[k])
                    throw InputError("participant " + id + ": x column " + schema.x_cols[k] +
                                     " varies over time");
        p.x = std::move(x_enc);
        ds.participants.push_back(std::move(p));
    }
    if (ds.participants.empty()) throw InputError("dataset has no rows: " + path);
    ds.time_points = max_time + 1;
    return ds;
}

void write_dataset_csv(const LongitudinalDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write dataset: " + path);
    const bool with_c = ds.has_true_compliance();
    out << "id,time,arm,y";
    for (const auto& zn : ds.z_names) out << "," << zn;
    for (const auto& xn : ds.x_names) out << "," << xn;
    out << ",b,d";
    if (with_c) out << ",c";
    out << "\n";
    auto cell = [](double v) { return is_absent(v) ? std::string() : format_double(v); };
    for (const auto& p : ds.participants) {
        for (const auto& o : p.obs) {
            out << p.id << "," << o.time << "," << p.arm << "," << cell(o.y);
            for (double zv : o.z) out << "," << cell(zv);
            for (double xv : p.x) out << "," << format_double(xv);
            out << "," << cell(o.b) << "," << (o.d < 0 ? std::string() : std::to_string(o.d));
            if (with_c) out << "," << (o.c < 0 ? std::string() : std::to_string(o.c));
            out << "\n";
        }
    }
    if (!out) throw InputError("write failed: " + path);
}

void mark_missing_as_noncompliant(LongitudinalDataset& ds) {
    for (auto& p : ds.participants)
        for (auto& o : p.obs)
            if (o.time >= 1 && o.missing) o.d = 0;
}

std::vector<ViewRow> estimation_view(const LongitudinalDataset& ds) {
    std::vector<ViewRow> view;
    for (std::size_t pi = 0; pi < ds.participants.size(); ++pi) {
        const auto& p = ds.participants[pi];
        for (const auto& o : p.obs) {
            if (o.time < 1 || o.missing || o.d != 1) continue;
            const Observation* prev = p.at_time(o.time - 1);
            if (prev == nullptr || prev->missing) continue;
            view.push_back({static_cast<int>(pi), o.time, &o, prev});
        }
    }
    return view;
}

std::vector<ViewRow> estimation_view(const LongitudinalDataset& ds, const std::string& arm) {
    std::vector<ViewRow> view;
    for (auto& row : estimation_view(ds))
        if (ds.participants[row.participant].arm == arm) view.push_back(row);
    return view;
}

}  // namespace gcomp
