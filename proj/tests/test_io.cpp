#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stlpi/io.hpp"
#include "stlpi/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

using namespace stlpi;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("stlpi_io_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("format_double round-trips exactly") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        double x = std::ldexp(rng.normal(), static_cast<int>(rng.next_u64() % 60) - 30);
        double back = std::stod(format_double(x));
        CHECK(back == x);
    }
    CHECK(format_double(0.0) == "0");
    CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("csv write/read round-trip") {
    TempDir tmp;
    CsvTable t;
    t.header = {"a", "b", "c"};
    Rng rng(8);
    for (int r = 0; r < 20; ++r)
        t.rows.push_back({rng.normal(), rng.normal() * 1e-12, rng.normal() * 1e9});
    std::string path = tmp.file("table.csv");
    write_csv(path, t);
    CsvTable back = read_csv(path);
    REQUIRE(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r)
        for (size_t c = 0; c < t.rows[r].size(); ++c)
            CHECK(back.rows[r][c] == t.rows[r][c]); // bit-exact
    CHECK_THROWS(read_csv(tmp.file("missing.csv")));
}

TEST_CASE("trajectory csv round-trip") {
    TempDir tmp;
    Trajectory tr;
    tr.dt = 0.02;
    Rng rng(3);
    const int n = 3, m = 2, steps = 15;
    for (int t = 0; t <= steps; ++t) {
        Eigen::VectorXd x(n);
        for (int j = 0; j < n; ++j)
            x[j] = rng.normal();
        tr.states.push_back(x);
    }
    for (int t = 0; t < steps; ++t) {
        Eigen::VectorXd u(m);
        for (int j = 0; j < m; ++j)
            u[j] = rng.normal();
        tr.inputs.push_back(u);
    }
    std::string path = tmp.file("traj.csv");
    write_trajectory_csv(path, tr);

    // final row holds the terminal state with zero inputs
    CsvTable raw = read_csv(path);
    REQUIRE(raw.header.size() == 1 + n + m);
    CHECK(raw.header[0] == "t");
    REQUIRE(raw.rows.size() == steps + 1);
    for (int j = 0; j < m; ++j)
        CHECK(raw.rows.back()[1 + n + j] == 0.0);

    Trajectory back = read_trajectory_csv(path, n, m);
    CHECK(back.dt == tr.dt);
    REQUIRE(back.states.size() == tr.states.size());
    REQUIRE(back.inputs.size() == tr.inputs.size());
    for (size_t t = 0; t < tr.states.size(); ++t)
        CHECK(back.states[t] == tr.states[t]);
    for (size_t t = 0; t < tr.inputs.size(); ++t)
        CHECK(back.inputs[t] == tr.inputs[t]);
}

TEST_CASE("history csv schema") {
    TempDir tmp;
    std::vector<IterRecord> hist(3);
    for (int k = 0; k < 3; ++k) {
        hist[k].k = k + 1;
        hist[k].lambda = 0.5 + k;
        hist[k].best_cost = 10.0 - k;
        hist[k].best_rho = -0.5 + 0.3 * k;
        hist[k].median_J = 12.0 - k;
        hist[k].mean_cost = 11.0 - k;
        hist[k].mean_rho = -0.6 + 0.3 * k;
    }
    std::string path = tmp.file("history.csv");
    write_history_csv(path, hist);
    CsvTable t = read_csv(path);
    REQUIRE(t.rows.size() == 3);
    REQUIRE(t.header.size() >= 7);
    CHECK(t.header[0] == "k");
    for (int k = 0; k < 3; ++k) {
        CHECK(t.rows[k][0] == k + 1);
        CHECK(t.rows[k][1] == hist[k].lambda);
        CHECK(t.rows[k][2] == hist[k].best_cost);
    }
}

TEST_CASE("funnels csv schema") {
    TempDir tmp;
    std::vector<Funnel> funnels = {
        Funnel::constant(5, -5.0, 0.2, -7.0, AdaptMode::GammaOnlyFixedGamma),
        Funnel::constant(5, 0.05, 0.5, -1.0, AdaptMode::Frozen)};
    std::string path = tmp.file("funnels.csv");
    write_funnels_csv(path, funnels, 0.02);
    CsvTable t = read_csv(path);
    REQUIRE(t.header.size() == 1 + 2 * funnels.size());
    CHECK(t.header[0] == "t");
    REQUIRE(t.rows.size() == 5);
    for (int r = 0; r < 5; ++r) {
        CHECK(t.rows[r][0] == doctest::Approx(0.02 * r));
        CHECK(t.rows[r][1] == -5.0);
        CHECK(t.rows[r][2] == 0.2);
        CHECK(t.rows[r][3] == 0.05);
        CHECK(t.rows[r][4] == 0.5);
    }
}
