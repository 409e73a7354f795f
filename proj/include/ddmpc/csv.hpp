#pragma once

#include "ddmpc/experiment.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ddmpc {

/// Column names of a log: t, u*, y*, x*, objective, alpha_norm, sigma_norm,
/// [us*, ys*,] pe_min_sv, qp_iters. Artificial-setpoint columns appear only
/// for the nonlinear controller.
std::vector<std::string> log_header(const SimulationLog& log);

/// One row per record; NaN fields are written as "nan".
void write_log_csv(const SimulationLog& log, std::ostream& out);
void export_csv(const SimulationLog& log, const std::string& path);

/// Input/output data read from any CSV whose header names columns u1..um and
/// y1..yp (other columns are ignored).
struct IoData {
    Sequence u;
    Sequence y;
};

IoData read_io_csv(std::istream& in, const std::string& source = "<stream>");
IoData read_io_csv(const std::string& path);
void write_io_csv(const Sequence& u, const Sequence& y, const std::string& path);

}  // namespace ddmpc
