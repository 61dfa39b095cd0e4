#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gcomp/errors.hpp"

namespace gcomp {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
inline bool is_absent(double v) { return std::isnan(v); }

/// One participant-visit. Biomarker b and self-report d exist only for
/// time >= 1; true compliance c is carried by simulated data only.
/// A row with missing = true keeps its slot so that preprocessing rules
/// (e.g. treat missing visits as noncompliant) can rewrite d in place.
struct Observation {
    int time = 0;
    double y = kAbsent;
    std::vector<double> z;
    double b = kAbsent;
    int d = -1;  // -1 absent, else 0/1
    int c = -1;  // -1 absent, else 0/1
    bool missing = false;
};

struct Participant {
    std::string id;
    std::string arm;
    std::vector<double> x;
    std::vector<Observation> obs;  // strictly increasing time

    const Observation* at_time(int t) const {
        for (const auto& o : obs)
            if (o.time == t) return &o;
        return nullptr;
    }
};

struct Bounds {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

struct LongitudinalDataset {
    std::vector<Participant> participants;
    int time_points = 0;  // count including baseline; times run 0..time_points-1
    std::vector<std::string> z_names;
    std::vector<std::string> x_names;
    std::vector<Bounds> z_bounds;  // same length as z_names when set, else empty

    bool has_true_compliance() const;
    std::vector<std::string> arms() const;  // distinct arm labels, sorted
};

struct CsvSchema {
    std::string id = "id";
    std::string time = "time";
    std::string arm = "arm";
    std::string y = "y";
    std::vector<std::string> z_cols = {"z"};
    std::vector<std::string> x_cols = {"x"};
    std::string b = "b";
    std::string d = "d";
    std::string c = "c";  // optional column
};

/// Long-format CSV ingestion. Groups rows by participant, sorts participants
/// by id (numeric order when every id parses as an integer) and observations
/// by time, validates domains, one-hot encodes categorical x columns with
/// lexicographic level order and the first level dropped.
LongitudinalDataset load_dataset(const std::string& path, const CsvSchema& schema);

/// Inverse of load_dataset for datasets whose x columns are already numeric.
/// Numeric cells use shortest round-trip formatting, absent cells are empty.
void write_dataset_csv(const LongitudinalDataset& ds, const std::string& path);

/// Preprocessing rule: a missing post-baseline visit counts as noncompliant.
void mark_missing_as_noncompliant(LongitudinalDataset& ds);

/// One estimable transition: current observation at time >= 1 with d = 1,
/// both it and its lag non-missing.
struct ViewRow {
    int participant = 0;  // index into ds.participants
    int time = 0;         // time of cur
    const Observation* cur = nullptr;
    const Observation* prev = nullptr;
};

/// The estimation set: every transition that contributes to the weighted
/// estimating equations and the mixture fit. Self-reported noncompliance
/// (d = 0) and missing rows never enter.
std::vector<ViewRow> estimation_view(const LongitudinalDataset& ds);

/// estimation_view restricted to one arm.
std::vector<ViewRow> estimation_view(const LongitudinalDataset& ds, const std::string& arm);

}  // namespace gcomp
