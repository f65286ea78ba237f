#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace bm::cli {

struct RunConfig {
    std::string command;  // cdf|table|quantile|mc-cdf|mc-sample|gs-selftest|paths|compare-tables

    // high-precision commands
    std::string x;
    std::string start = "0.33";
    std::string end = "2.54";
    std::string step = "0.01";
    int K = 100;
    long bits = 4000;
    std::string eps = "1e-60";
    std::optional<long> fixed_n;
    int digits = 12;
    double p = 0.0;
    double tol = 1e-7;  // quantile threshold; tight tolerance for compare-tables

    // Monte Carlo commands
    double mc_eps = 1e-3;
    long C = 100000;
    long J = 100;
    long N = 10000;
    double alpha = 0.05;
    std::uint64_t seed = 20100226;
    int mesh = 12;

    // output
    int threads = 0;  // 0: resolve from BM_THREADS, then hardware
    std::string format = "csv";
    std::string out;

    // compare-tables
    std::string computed_path;
    std::string reference_path;
};

// Dispatches a validated config. Returns the process exit status:
// 0 success, 1 computation failure, 2 usage error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line entry point (parse + run).
int main_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// FNV-1a 64-bit checksum of a byte string; used to pin table fixtures.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace bm::cli
