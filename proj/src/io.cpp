#include "stlpi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stlpi {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary); // binary: fixed \n line endings
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    for (size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty CSV: " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ','))
        table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ','))
            row.push_back(std::stod(cell));
        if (row.size() != table.header.size())
            throw std::runtime_error("ragged CSV row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_history_csv(const std::string& path,
                       const std::vector<IterRecord>& history) {
    CsvTable t;
    t.header = {"k", "lambda", "bestC", "bestRho", "medianJ", "meanC", "meanRho"};
    for (const IterRecord& r : history)
        t.rows.push_back({static_cast<double>(r.k), r.lambda, r.best_cost,
                          r.best_rho, r.median_J, r.mean_cost, r.mean_rho});
    write_csv(path, t);
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
    const int n = tr.states.empty() ? 0 : static_cast<int>(tr.states[0].size());
    const int m = tr.inputs.empty() ? 0 : static_cast<int>(tr.inputs[0].size());
    CsvTable t;
    t.header.push_back("t");
    for (int i = 0; i < n; ++i)
        t.header.push_back("state_" + std::to_string(i));
    for (int i = 0; i < m; ++i)
        t.header.push_back("input_" + std::to_string(i));
    for (size_t k = 0; k < tr.states.size(); ++k) {
        std::vector<double> row;
        row.push_back(k * tr.dt);
        for (int i = 0; i < n; ++i)
            row.push_back(tr.states[k][i]);
        for (int i = 0; i < m; ++i)
            row.push_back(k < tr.inputs.size() ? tr.inputs[k][i] : 0.0);
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

Trajectory read_trajectory_csv(const std::string& path, int n, int m) {
    CsvTable t = read_csv(path);
    if (static_cast<int>(t.header.size()) != 1 + n + m)
        throw std::runtime_error("trajectory CSV column mismatch in " + path);
    Trajectory tr;
    if (t.rows.size() >= 2)
        tr.dt = t.rows[1][0] - t.rows[0][0];
    for (size_t k = 0; k < t.rows.size(); ++k) {
        Eigen::VectorXd x(n), u(m);
        for (int i = 0; i < n; ++i)
            x[i] = t.rows[k][1 + i];
        for (int i = 0; i < m; ++i)
            u[i] = t.rows[k][1 + n + i];
        tr.states.push_back(std::move(x));
        if (k + 1 < t.rows.size())
            tr.inputs.push_back(std::move(u));
    }
    return tr;
}

void write_funnels_csv(const std::string& path, const std::vector<Funnel>& funnels,
                       double dt) {
    CsvTable t;
    t.header.push_back("t");
    for (size_t i = 0; i < funnels.size(); ++i) {
        t.header.push_back("gamma_" + std::to_string(i));
        t.header.push_back("Gamma_" + std::to_string(i));
    }
    const int grid = funnels.empty() ? 0 : funnels[0].grid_size();
    for (int k = 0; k < grid; ++k) {
        std::vector<double> row;
        row.push_back(k * dt);
        for (const Funnel& f : funnels) {
            row.push_back(f.gamma[k]);
            row.push_back(f.Gamma[k]);
        }
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

} // namespace stlpi
