#pragma once

#include "farloc/workload.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace farloc::cli {

enum class ReportKind { swaps, links, both };

struct SweepSpec {
    std::vector<ContainerVariant> variants;
    std::vector<double> l_percents;
    std::vector<double> alphas;
    std::vector<double> update_ratios;
    BenchConfig base;
    ReportKind report = ReportKind::swaps;
    std::string out; ///< empty: standard output
};

/// Thrown for bad flags or values; the message is meant for the user.
struct UsageFailure {
    std::string message;
};

/// Parses flags (argv[0] is the program name). Throws UsageFailure. A help
/// request returns nullopt after printing usage to `help_out`.
std::optional<SweepSpec> parse_args(int argc, const char* const* argv, std::ostream& help_out);

/// Cartesian product in spec order: variant, then L, then alpha, then U.
std::vector<BenchConfig> expand(const SweepSpec& spec);

/// Runs every cell with up to `threads` cells in flight. `on_report` sees the
/// reports in spec order, each as soon as it and all earlier ones are done.
std::vector<BenchReport> run_sweep(const SweepSpec& spec, unsigned threads,
                                   const std::function<void(const BenchReport&)>& on_report = {});

/// Cell parallelism from FARLOC_THREADS, default 1.
unsigned threads_from_env();

std::string format_number(double v);
std::string format_ratio(double v);

std::string swaps_header();
std::string swaps_row(const BenchReport& r);
std::string links_header();
std::string links_row(const BenchReport& r);

/// Entry point of the farloc tool. Returns the process exit code:
/// 0 success, 2 usage error, 1 runtime error.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace farloc::cli
