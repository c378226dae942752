#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "jndq/errors.hpp"

namespace jndq {

// Sparse content x subject matrix of measured JND locations in QP units.
// Canonical form: id lists sorted ascending, cells sorted by
// (content, subject) index, missing cells simply absent.
struct Observations {
    struct Cell {
        std::size_t content;
        std::size_t subject;
        double jnd;
    };

    std::vector<std::string> contents;
    std::vector<std::string> subjects;
    std::vector<Cell> cells;
};

struct DatasetSummary {
    std::size_t n_contents = 0;
    std::size_t n_subjects = 0;
    std::size_t n_cells = 0;
    std::vector<double> per_content_mean;
    std::vector<double> per_content_std;
};

// Checks canonical ordering plus the data invariants: unique (content,
// subject) pairs, jnd finite within [0, 51], and at least two observations
// per content and per subject (needed for joint identifiability).
inline void validate(const Observations& obs) {
    for (std::size_t i = 1; i < obs.contents.size(); ++i)
        if (!(obs.contents[i - 1] < obs.contents[i]))
            throw DataError("content ids not sorted/unique");
    for (std::size_t i = 1; i < obs.subjects.size(); ++i)
        if (!(obs.subjects[i - 1] < obs.subjects[i]))
            throw DataError("subject ids not sorted/unique");
    for (const auto& id : obs.contents)
        if (id.empty()) throw DataError("empty content id");
    for (const auto& id : obs.subjects)
        if (id.empty()) throw DataError("empty subject id");

    std::vector<std::size_t> per_content(obs.contents.size(), 0);
    std::vector<std::size_t> per_subject(obs.subjects.size(), 0);
    for (std::size_t i = 0; i < obs.cells.size(); ++i) {
        const auto& cell = obs.cells[i];
        if (cell.content >= obs.contents.size() ||
            cell.subject >= obs.subjects.size())
            throw DataError("cell index out of range");
        if (i > 0) {
            const auto& prev = obs.cells[i - 1];
            if (std::make_pair(prev.content, prev.subject) >=
                std::make_pair(cell.content, cell.subject))
                throw DataError(
                    "duplicate or unsorted (content, subject) pair: " +
                    obs.contents[cell.content] + "," +
                    obs.subjects[cell.subject]);
        }
        if (!std::isfinite(cell.jnd) || cell.jnd < 0.0 || cell.jnd > 51.0)
            throw DataError("jnd out of [0, 51] for " +
                            obs.contents[cell.content] + "," +
                            obs.subjects[cell.subject]);
        ++per_content[cell.content];
        ++per_subject[cell.subject];
    }
    for (std::size_t c = 0; c < per_content.size(); ++c)
        if (per_content[c] < 2)
            throw DataError("content " + obs.contents[c] +
                            " has fewer than 2 observed subjects");
    for (std::size_t s = 0; s < per_subject.size(); ++s)
        if (per_subject[s] < 2)
            throw DataError("subject " + obs.subjects[s] +
                            " has fewer than 2 observed contents");
}

// Builds canonical, validated Observations from rows in any order.
inline Observations make_observations(
    std::vector<std::pair<std::string, std::string>> pairs,
    std::vector<double> jnds) {
    Observations obs;
    for (const auto& pr : pairs) {
        obs.contents.push_back(pr.first);
        obs.subjects.push_back(pr.second);
    }
    auto dedup_sort = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup_sort(obs.contents);
    dedup_sort(obs.subjects);
    auto index_of = [](const std::vector<std::string>& v,
                       const std::string& id) {
        return static_cast<std::size_t>(
            std::lower_bound(v.begin(), v.end(), id) - v.begin());
    };
    obs.cells.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        obs.cells.push_back({index_of(obs.contents, pairs[i].first),
                             index_of(obs.subjects, pairs[i].second),
                             jnds[i]});
    std::sort(obs.cells.begin(), obs.cells.end(),
              [](const Observations::Cell& a, const Observations::Cell& b) {
                  return std::make_pair(a.content, a.subject) <
                         std::make_pair(b.content, b.subject);
              });
    validate(obs);
    return obs;
}

// Long-form CSV: header exactly "content_id,subject_id,jnd", one observed
// cell per row.  Row order in the file does not matter.
inline Observations load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "content_id,subject_id,jnd")
        throw DataError(path + ": bad header, expected content_id,subject_id,jnd");

    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<double> jnds;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 =
            c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 3 comma-separated fields");
        const std::string content = line.substr(0, c1);
        const std::string subject = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string num = line.substr(c2 + 1);
        if (content.empty() || subject.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty id");
        char* end = nullptr;
        const double jnd = std::strtod(num.c_str(), &end);
        if (num.empty() || end != num.c_str() + num.size())
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": jnd is not a number: " + num);
        if (!std::isfinite(jnd) || jnd < 0.0 || jnd > 51.0)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": jnd outside [0, 51]: " + num);
        pairs.emplace_back(content, subject);
        jnds.push_back(jnd);
    }
    // Duplicate pairs are caught by validation of the sorted cell list.
    return make_observations(std::move(pairs), std::move(jnds));
}

// Writes canonical CSV: rows sorted by (content_id, subject_id), values with
// 6 decimal digits, LF line endings.  load_csv(write_csv(obs)) round-trips
// exactly for values representable at that precision (all simulator outputs
// are: every search interval is a multiple of 51/64).
inline void write_csv(const Observations& obs, const std::string& path) {
    validate(obs);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "content_id,subject_id,jnd\n";
    char buf[64];
    for (const auto& cell : obs.cells) {
        std::snprintf(buf, sizeof(buf), "%.6f", cell.jnd);
        out << obs.contents[cell.content] << ','
            << obs.subjects[cell.subject] << ',' << buf << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

inline DatasetSummary summarize(const Observations& obs) {
    DatasetSummary sum;
    sum.n_contents = obs.contents.size();
    sum.n_subjects = obs.subjects.size();
    sum.n_cells = obs.cells.size();
    sum.per_content_mean.assign(sum.n_contents, 0.0);
    sum.per_content_std.assign(sum.n_contents, 0.0);
    std::vector<std::size_t> n(sum.n_contents, 0);
    for (const auto& cell : obs.cells) {
        sum.per_content_mean[cell.content] += cell.jnd;
        ++n[cell.content];
    }
    for (std::size_t c = 0; c < sum.n_contents; ++c)
        sum.per_content_mean[c] /= static_cast<double>(n[c]);
    for (const auto& cell : obs.cells) {
        const double d = cell.jnd - sum.per_content_mean[cell.content];
        sum.per_content_std[cell.content] += d * d;
    }
    for (std::size_t c = 0; c < sum.n_contents; ++c)
        sum.per_content_std[c] =
            n[c] > 1 ? std::sqrt(sum.per_content_std[c] /
                                 static_cast<double>(n[c] - 1))
                     : 0.0;
    return sum;
}

}  // namespace jndq
