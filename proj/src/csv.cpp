#include "mrtcee/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

int parse_int_cell(std::string_view cell, const std::string& col, std::size_t line_no) {
    const auto value = parse_double(cell);
    if (!value || *value != std::floor(*value) || std::abs(*value) > 1e9) {
        throw ValidationError("line " + std::to_string(line_no) + ": non-numeric or non-integer cell '" +
                              std::string(cell) + "' in column " + col);
    }
    return static_cast<int>(*value);
}

double parse_real_cell(std::string_view cell, const std::string& col, std::size_t line_no) {
    if (cell.empty()) {
        throw ValidationError("line " + std::to_string(line_no) + ": missing value in column " + col);
    }
    const auto value = parse_double(cell);
    if (!value) {
        throw ValidationError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                              std::string(cell) + "' in column " + col);
    }
    return *value;
}

}  // namespace

std::vector<std::string> split_fields(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        const auto field = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        out.emplace_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

MrtDataset read_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
            line.erase(0, 3);  // UTF-8 BOM
        }
        if (!trim(line).empty()) {
            header = split_fields(line);
            break;
        }
    }
    if (header.empty()) {
        throw ValidationError("CSV has no header row");
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!index.emplace(header[i], i).second) {
            throw ValidationError("duplicate column '" + header[i] + "'");
        }
    }
    auto column = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) {
            throw ValidationError("missing column '" + name + "'");
        }
        return it->second;
    };

    const std::size_t id_i = column(schema.id_col);
    const std::size_t t_i = column(schema.t_col);
    const std::size_t a_i = column(schema.avail_col);
    const std::size_t trt_i = column(schema.trt_col);
    const std::size_t y_i = column(schema.outcome_col);

    std::vector<std::size_t> prob_i;
    std::vector<std::string> prob_names = schema.prob_cols;
    if (!schema.constant_probs) {
        if (prob_names.empty()) {
            for (int k = 0;; ++k) {
                const std::string name = "prob_" + std::to_string(k);
                if (!index.count(name)) break;
                prob_names.push_back(name);
            }
        }
        if (prob_names.size() < 2) {
            throw ValidationError("missing column: need at least two probability columns (prob_0, prob_1, ...) "
                                  "or a constant probability vector");
        }
        for (const auto& name : prob_names) prob_i.push_back(column(name));
    } else if (schema.constant_probs->size() < 2) {
        throw ValidationError("constant probability vector needs at least two entries");
    }

    const int K = schema.constant_probs ? static_cast<int>(schema.constant_probs->size()) - 1
                                        : static_cast<int>(prob_names.size()) - 1;
    if (schema.declared_k && *schema.declared_k != K) {
        throw ValidationError("dimension violation: declared K = " + std::to_string(*schema.declared_k) +
                              " but the probability columns imply K = " + std::to_string(K));
    }

    std::set<std::size_t> reserved{id_i, t_i, a_i, trt_i, y_i};
    reserved.insert(prob_i.begin(), prob_i.end());
    std::vector<std::size_t> feature_i;
    MrtDataset data;
    data.K = K;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!reserved.count(i)) {
            feature_i.push_back(i);
            data.feature_names.push_back(header[i]);
        }
    }

    std::map<std::string, std::size_t> subject_pos;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_fields(line);
        if (cells.size() != header.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, found " +
                                  std::to_string(cells.size()));
        }
        DecisionRecord rec;
        rec.t = parse_int_cell(cells[t_i], schema.t_col, line_no) - 1;
        if (rec.t < 0) {
            throw ValidationError("line " + std::to_string(line_no) + ": decision points are 1-based");
        }
        rec.availability = parse_int_cell(cells[a_i], schema.avail_col, line_no);
        rec.treatment = parse_int_cell(cells[trt_i], schema.trt_col, line_no);
        rec.outcome = parse_real_cell(cells[y_i], schema.outcome_col, line_no);
        if (schema.constant_probs) {
            rec.rand_probs = *schema.constant_probs;
        } else {
            rec.rand_probs.resize(static_cast<Eigen::Index>(prob_i.size()));
            for (std::size_t k = 0; k < prob_i.size(); ++k) {
                rec.rand_probs(static_cast<Eigen::Index>(k)) =
                    parse_real_cell(cells[prob_i[k]], prob_names[k], line_no);
            }
        }
        rec.features.resize(static_cast<Eigen::Index>(feature_i.size()));
        for (std::size_t f = 0; f < feature_i.size(); ++f) {
            rec.features(static_cast<Eigen::Index>(f)) =
                parse_real_cell(cells[feature_i[f]], data.feature_names[f], line_no);
        }

        const std::string& id = cells[id_i];
        if (id.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty subject id");
        }
        auto [it, inserted] = subject_pos.emplace(id, data.subjects.size());
        if (inserted) {
            data.subjects.push_back(SubjectTrajectory{id, {}});
        }
        data.subjects[it->second].records.push_back(std::move(rec));
    }
    if (data.subjects.empty()) {
        throw ValidationError("CSV has no data rows");
    }

    for (auto& subject : data.subjects) {
        auto& recs = subject.records;
        std::stable_sort(recs.begin(), recs.end(),
                         [](const DecisionRecord& a, const DecisionRecord& b) { return a.t < b.t; });
        for (std::size_t r = 1; r < recs.size(); ++r) {
            if (recs[r].t == recs[r - 1].t) {
                throw ValidationError("duplicate (id, t) = (" + subject.subject_id + ", " +
                                      std::to_string(recs[r].t + 1) + ")");
            }
        }
    }
    data.T = static_cast<int>(data.subjects.front().records.size());
    for (const auto& subject : data.subjects) {
        if (static_cast<int>(subject.records.size()) != data.T) {
            throw ValidationError("ragged panel: subject " + subject.subject_id + " has " +
                                  std::to_string(subject.records.size()) +
                                  " decision points, expected " + std::to_string(data.T));
        }
    }

    const auto report = validate(data);
    if (!report.ok()) {
        throw ValidationError(report.violations.front());
    }
    return data;
}

MrtDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open data file '" + path.string() + "'");
    }
    return read_csv(in, schema);
}

void write_csv(std::ostream& out, const MrtDataset& data) {
    out << "id,t,avail,trt";
    for (int k = 0; k <= data.K; ++k) out << ",prob_" << k;
    out << ",outcome";
    for (const auto& name : data.feature_names) out << ',' << name;
    out << '\n';
    for (const auto& subject : data.subjects) {
        for (const auto& rec : subject.records) {
            out << subject.subject_id << ',' << (rec.t + 1) << ',' << rec.availability << ','
                << rec.treatment;
            for (Eigen::Index k = 0; k < rec.rand_probs.size(); ++k) {
                out << ',' << format_double(rec.rand_probs(k));
            }
            out << ',' << format_double(rec.outcome);
            for (Eigen::Index f = 0; f < rec.features.size(); ++f) {
                out << ',' << format_double(rec.features(f));
            }
            out << '\n';
        }
    }
}

Eigen::MatrixXd load_numeric_matrix(const std::filesystem::path& path, int cols) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open matrix file '" + path.string() + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
        const auto fields = split_fields(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& f : fields) {
            const auto v = parse_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw ValidationError("matrix file '" + path.string() + "' has a non-numeric row");
        }
        first = false;
        if (static_cast<int>(row.size()) != cols) {
            throw ValidationError("matrix file rows must have " + std::to_string(cols) + " entries");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ValidationError("matrix file '" + path.string() + "' has no rows");
    }
    Eigen::MatrixXd l(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int k = 0; k < cols; ++k) l(i, k) = rows[i][k];
    }
    return l;
}

}  // namespace mrtcee
