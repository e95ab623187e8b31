#include "farloc/cli.hpp"

#include "farloc/error.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

namespace farloc::cli {

std::optional<SweepSpec> parse_args(int argc, const char* const* argv, std::ostream& help_out)
{
    SweepSpec spec;
    std::vector<std::string> variants;
    std::string report = "swaps";

    CLI::App app{"Far-memory placement benchmark: runs a sweep and writes CSV.", "farloc"};
    app.add_option("--variant", variants,
                   "Container variant (repeatable): plain, hint, local, dfs, local+dfs, veb, local+veb, "
                   "or skiplist:{plain,hint,local,page,local+page}");
    app.add_option("--l-percent", spec.l_percents, "Local memory limit L as % of total data (repeatable)");
    app.add_option("--alpha", spec.alphas, "Zipf skewness of query keys (repeatable)");
    app.add_option("--update-ratio", spec.update_ratios, "Probability that a query is an update (repeatable)");
    app.add_option("--data-bytes", spec.base.total_data_bytes, "Total key-value data in bytes")
        ->capture_default_str();
    app.add_option("--value-size", spec.base.value_size, "Value size in bytes")->capture_default_str();
    app.add_option("--page-size", spec.base.page_size, "Swap page size in bytes")->capture_default_str();
    app.add_option("--queries", spec.base.num_queries, "Number of measurement queries")->capture_default_str();
    app.add_option("--seed", spec.base.seed, "Random seed")->capture_default_str();
    app.add_option("--out", spec.out, "Output CSV path (default: standard output)");
    app.add_option("--report", report, "Report kind")
        ->check(CLI::IsMember({"swaps", "links", "both"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        help_out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageFailure{e.what()};
    }

    for (const std::string& name : variants) {
        const auto v = parse_variant(name);
        if (!v)
            throw UsageFailure{"unknown variant '" + name + "'"};
        spec.variants.push_back(*v);
    }
    if (spec.variants.empty())
        spec.variants.push_back(ContainerVariant::of(BTreeVariant::plain));
    if (spec.l_percents.empty())
        spec.l_percents.push_back(50);
    if (spec.alphas.empty())
        spec.alphas.push_back(0.8);
    if (spec.update_ratios.empty())
        spec.update_ratios.push_back(0.05);
    spec.report = report == "links" ? ReportKind::links : report == "both" ? ReportKind::both : ReportKind::swaps;

    try {
        for (const BenchConfig& cfg : expand(spec))
            cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageFailure{e.what()};
    }
    return spec;
}

std::vector<BenchConfig> expand(const SweepSpec& spec)
{
    std::vector<BenchConfig> out;
    for (const ContainerVariant& v : spec.variants)
        for (const double l : spec.l_percents)
            for (const double a : spec.alphas)
                for (const double u : spec.update_ratios) {
                    BenchConfig cfg = spec.base;
                    cfg.variant = v;
                    cfg.L_percent = l;
                    cfg.alpha = a;
                    cfg.update_ratio = u;
                    out.push_back(cfg);
                }
    return out;
}

std::vector<BenchReport> run_sweep(const SweepSpec& spec, unsigned threads,
                                   const std::function<void(const BenchReport&)>& on_report)
{
    const auto cells = expand(spec);
    std::vector<BenchReport> reports(cells.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));

    if (threads == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            reports[i] = run_benchmark(cells[i]);
            if (on_report)
                on_report(reports[i]);
        }
        return reports;
    }

    std::vector<char> done(cells.size(), 0);
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex m;
    std::condition_variable cv;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || stop)
                return;
            BenchReport r;
            std::exception_ptr err;
            try {
                r = run_benchmark(cells[i]);
            } catch (...) {
                err = std::current_exception();
            }
            {
                std::lock_guard lock(m);
                reports[i] = std::move(r);
                errors[i] = err;
                done[i] = 1;
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back(worker);

    std::exception_ptr failure;
    for (std::size_t i = 0; i < cells.size() && !failure; ++i) {
        std::unique_lock lock(m);
        cv.wait(lock, [&] { return done[i] != 0; });
        if (errors[i]) {
            failure = errors[i];
            stop = true;
            break;
        }
        lock.unlock();
        if (on_report) {
            try {
                on_report(reports[i]);
            } catch (...) {
                failure = std::current_exception();
                stop = true;
            }
        }
    }
    for (std::thread& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return reports;
}

unsigned threads_from_env()
{
    const char* s = std::getenv("FARLOC_THREADS");
    if (!s || !*s)
        return 1;
    unsigned n = 0;
    const char* end = s + std::char_traits<char>::length(s);
    const auto [ptr, ec] = std::from_chars(s, end, n);
    if (ec != std::errc{} || ptr != end || n == 0)
        return 1;
    return n;
}

std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_ratio(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    return std::string(buf, ptr);
}

std::string swaps_header()
{
    return "variant,L_percent,alpha,update_ratio,page_size,num_queries,swap_ins,write_backs";
}

std::string swaps_row(const BenchReport& r)
{
    const BenchConfig& c = r.config;
    return to_string(c.variant) + ',' + format_number(c.L_percent) + ',' + format_number(c.alpha) + ',' +
           format_number(c.update_ratio) + ',' + std::to_string(c.page_size) + ',' + std::to_string(c.num_queries) +
           ',' + std::to_string(r.measurement.swap_ins) + ',' + std::to_string(r.measurement.write_backs);
}

std::string links_header()
{
    return "variant,L_percent,purely_local_ratio,in_page_ratio,cross_page_ratio";
}

std::string links_row(const BenchReport& r)
{
    const LinkComposition links = r.links.value_or(LinkComposition{});
    return to_string(r.config.variant) + ',' + format_number(r.config.L_percent) + ',' +
           format_ratio(links.purely_local_ratio()) + ',' + format_ratio(links.in_page_ratio()) + ',' +
           format_ratio(links.cross_page_ratio());
}

namespace {

// "out/run.csv" -> "out/run-links.csv"
std::string links_path(const std::string& path)
{
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash) || dot == 0)
        return path + "-links";
    return path.substr(0, dot) + "-links" + path.substr(dot);
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

} // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    std::optional<SweepSpec> spec;
    try {
        spec = parse_args(argc, argv, out);
    } catch (const UsageFailure& e) {
        err << "farloc: " << e.message << "\nRun with --help for usage.\n";
        return 2;
    }
    if (!spec)
        return 0;

    try {
        std::ofstream swaps_file;
        std::ofstream links_file;
        std::ostream* swaps_out = nullptr;
        std::ostream* links_out = nullptr;
        const bool want_swaps = spec->report != ReportKind::links;
        const bool want_links = spec->report != ReportKind::swaps;
        if (spec->out.empty()) {
            swaps_out = want_swaps ? &out : nullptr;
            links_out = want_links ? &out : nullptr;
        } else if (spec->report == ReportKind::links) {
            links_file = open_output(spec->out);
            links_out = &links_file;
        } else {
            swaps_file = open_output(spec->out);
            swaps_out = &swaps_file;
            if (want_links) {
                links_file = open_output(links_path(spec->out));
                links_out = &links_file;
            }
        }

        if (swaps_out)
            *swaps_out << swaps_header() << '\n' << std::flush;

        // One links row per (variant, L): the layout does not depend on alpha or U.
        std::set<std::pair<std::string, double>> linked;
        std::vector<std::string> link_rows;
        run_sweep(*spec, threads_from_env(), [&](const BenchReport& r) {
            if (swaps_out)
                *swaps_out << swaps_row(r) << '\n' << std::flush;
            if (links_out && linked.emplace(to_string(r.config.variant), r.config.L_percent).second)
                link_rows.push_back(links_row(r));
        });

        if (links_out) {
            if (links_out == swaps_out)
                *links_out << '\n';
            *links_out << links_header() << '\n';
            for (const std::string& row : link_rows)
                *links_out << row << '\n';
            links_out->flush();
        }
        if (!out || (swaps_file.is_open() && !swaps_file) || (links_file.is_open() && !links_file))
            throw std::runtime_error("failed writing output");
    } catch (const ConfigError& e) {
        err << "farloc: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "farloc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace farloc::cli
