#pragma once

#include "stlpi/funnels.hpp"
#include "stlpi/pi2.hpp"
#include "stlpi/stl.hpp"

#include <string>
#include <vector>

namespace stlpi {

// Full-precision double formatting (%.17g) so CSV diffs are exact.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

void write_history_csv(const std::string& path,
                       const std::vector<IterRecord>& history);

// Columns: t, state_0..state_{n-1}, input_0..input_{m-1}; the final row
// carries the terminal state with zero inputs.
void write_trajectory_csv(const std::string& path, const Trajectory& tr);
Trajectory read_trajectory_csv(const std::string& path, int n, int m);

// Columns: t, gamma_0, Gamma_0, gamma_1, Gamma_1, ...
void write_funnels_csv(const std::string& path, const std::vector<Funnel>& funnels,
                       double dt);

} // namespace stlpi
