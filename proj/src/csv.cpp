#include "ddmpc/csv.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace ddmpc {

namespace {

void put(std::ostream& out, double v) {
    if (std::isnan(v)) {
        out << "nan";
    } else {
        out << v;
    }
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::vector<std::string> log_header(const SimulationLog& log) {
    std::vector<std::string> header{"t"};
    if (log.records.empty()) return header;
    const StepRecord& r = log.records.front();
    for (Index i = 0; i < r.u.size(); ++i) header.push_back("u" + std::to_string(i + 1));
    for (Index i = 0; i < r.y.size(); ++i) header.push_back("y" + std::to_string(i + 1));
    for (Index i = 0; i < r.x.size(); ++i) header.push_back("x" + std::to_string(i + 1));
    header.insert(header.end(), {"objective", "alpha_norm", "sigma_norm"});
    if (log.artificial_setpoint) {
        for (Index i = 0; i < r.u.size(); ++i) header.push_back("us" + std::to_string(i + 1));
        for (Index i = 0; i < r.y.size(); ++i) header.push_back("ys" + std::to_string(i + 1));
    }
    header.insert(header.end(), {"pe_min_sv", "qp_iters"});
    return header;
}

void write_log_csv(const SimulationLog& log, std::ostream& out) {
    const std::vector<std::string> header = log_header(log);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    out << std::setprecision(12);
    for (const StepRecord& r : log.records) {
        out << r.t;
        for (const Vector* v : {&r.u, &r.y, &r.x}) {
            for (Index i = 0; i < v->size(); ++i) {
                out << ',';
                put(out, (*v)(i));
            }
        }
        for (double v : {r.objective, r.alpha_norm, r.sigma_norm}) {
            out << ',';
            put(out, v);
        }
        if (log.artificial_setpoint) {
            const Index m = r.u.size(), p = r.y.size();
            for (Index i = 0; i < m; ++i) {
                out << ',';
                put(out, r.u_setpoint.size() == m ? r.u_setpoint(i) : std::nan(""));
            }
            for (Index i = 0; i < p; ++i) {
                out << ',';
                put(out, r.y_setpoint.size() == p ? r.y_setpoint(i) : std::nan(""));
            }
        }
        out << ',';
        put(out, r.pe_min_sv);
        out << ',' << r.qp_iterations << '\n';
    }
}

void export_csv(const SimulationLog& log, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw IoError("cannot write " + path);
    write_log_csv(log, file);
    if (!file) throw IoError("error while writing " + path);
}

IoData read_io_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(source + ": empty file");
    const std::vector<std::string> header = split(line);
    std::map<Index, std::size_t> u_cols, y_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name.size() < 2 || (name[0] != 'u' && name[0] != 'y')) continue;
        const std::string digits = name.substr(1);
        if (digits.find_first_not_of("0123456789") != std::string::npos) continue;
        const Index idx = std::stol(digits);
        if (idx < 1) continue;
        (name[0] == 'u' ? u_cols : y_cols)[idx] = c;
    }
    if (u_cols.empty() || y_cols.empty()) throw IoError(source + ": header must name columns u1.. and y1..");
    auto check_contiguous = [&](const std::map<Index, std::size_t>& cols, const char* what) {
        Index expect = 1;
        for (const auto& kv : cols) {
            if (kv.first != expect++) throw IoError(source + ": " + what + " columns are not numbered 1..k");
        }
    };
    check_contiguous(u_cols, "input");
    check_contiguous(y_cols, "output");

    std::vector<Vector> us, ys;
    Index line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = split(line);
        if (cells.size() != header.size()) {
            throw IoError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields, got " + std::to_string(cells.size()));
        }
        auto read = [&](const std::map<Index, std::size_t>& cols) {
            Vector v(static_cast<Index>(cols.size()));
            Index i = 0;
            for (const auto& kv : cols) {
                const std::string& cell = cells[kv.second];
                std::size_t used = 0;
                double value = 0.0;
                try {
                    value = std::stod(cell, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used == 0 || used != cell.size()) {
                    throw IoError(source + ": line " + std::to_string(line_no) + ": cannot parse '" + cell + "' in column " +
                                  header[kv.second]);
                }
                v(i++) = value;
            }
            return v;
        };
        us.push_back(read(u_cols));
        ys.push_back(read(y_cols));
    }
    if (us.empty()) throw IoError(source + ": no data rows");
    return {Sequence::from_samples(us), Sequence::from_samples(ys)};
}

IoData read_io_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open " + path);
    return read_io_csv(file, path);
}

void write_io_csv(const Sequence& u, const Sequence& y, const std::string& path) {
    require_dims(u.length() == y.length(), "write_io_csv: input and output lengths differ");
    std::ofstream file(path);
    if (!file) throw IoError("cannot write " + path);
    file << "t";
    for (Index i = 0; i < u.dim(); ++i) file << ",u" << i + 1;
    for (Index i = 0; i < y.dim(); ++i) file << ",y" << i + 1;
    file << '\n' << std::setprecision(17);
    for (Index k = 0; k < u.length(); ++k) {
        file << k;
        for (Index i = 0; i < u.dim(); ++i) file << ',' << u.samples()(i, k);
        for (Index i = 0; i < y.dim(); ++i) file << ',' << y.samples()(i, k);
        file << '\n';
    }
    if (!file) throw IoError("error while writing " + path);
}

}  // namespace ddmpc
