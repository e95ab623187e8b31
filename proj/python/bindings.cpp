#include "farloc/btree.hpp"
#include "farloc/error.hpp"
#include "farloc/metrics.hpp"
#include "farloc/workload.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace farloc;

namespace {

ContainerVariant variant_from(const std::string& name)
{
    const auto v = parse_variant(name);
    if (!v)
        throw py::value_error("unknown variant '" + name + "'");
    return *v;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Far-memory placement simulator: containers, allocators and the two-phase benchmark.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
    py::register_exception<CapacityExhausted>(m, "CapacityExhausted", PyExc_MemoryError);

    m.def("fnv64", &fnv64, py::arg("x"), "FNV-1a 64-bit hash of the 8 little-endian bytes of x.");

    py::class_<SwapStats>(m, "SwapStats")
        .def_readonly("swap_ins", &SwapStats::swap_ins)
        .def_readonly("write_backs", &SwapStats::write_backs)
        .def_readonly("faults", &SwapStats::faults)
        .def("__repr__", [](const SwapStats& s) {
            return "SwapStats(swap_ins=" + std::to_string(s.swap_ins) +
                   ", write_backs=" + std::to_string(s.write_backs) + ", faults=" + std::to_string(s.faults) + ")";
        });

    py::class_<LinkComposition>(m, "LinkComposition")
        .def_readonly("purely_local", &LinkComposition::purely_local)
        .def_readonly("in_page", &LinkComposition::in_page)
        .def_readonly("cross_page", &LinkComposition::cross_page)
        .def_property_readonly("total", &LinkComposition::total)
        .def_property_readonly("purely_local_ratio", &LinkComposition::purely_local_ratio)
        .def_property_readonly("in_page_ratio", &LinkComposition::in_page_ratio)
        .def_property_readonly("cross_page_ratio", &LinkComposition::cross_page_ratio);

    py::class_<ZipfSampler>(m, "ZipfSampler")
        .def(py::init<std::size_t, double>(), py::arg("n"), py::arg("alpha"))
        .def("rank_for", &ZipfSampler::rank_for, py::arg("u"))
        .def("pmf", &ZipfSampler::pmf, py::arg("rank"))
        .def_property_readonly("n", &ZipfSampler::n)
        .def_property_readonly("alpha", &ZipfSampler::alpha);

    py::class_<BenchConfig>(m, "BenchConfig")
        .def(py::init<>())
        .def_readwrite("total_data_bytes", &BenchConfig::total_data_bytes)
        .def_readwrite("value_size", &BenchConfig::value_size)
        .def_readwrite("L_percent", &BenchConfig::L_percent)
        .def_readwrite("alpha", &BenchConfig::alpha)
        .def_readwrite("update_ratio", &BenchConfig::update_ratio)
        .def_readwrite("num_queries", &BenchConfig::num_queries)
        .def_readwrite("scan_len_max", &BenchConfig::scan_len_max)
        .def_readwrite("page_size", &BenchConfig::page_size)
        .def_readwrite("seed", &BenchConfig::seed)
        .def_readwrite("rearrange", &BenchConfig::rearrange)
        .def_property(
            "variant", [](const BenchConfig& c) { return to_string(c.variant); },
            [](BenchConfig& c, const std::string& name) { c.variant = variant_from(name); })
        .def_property_readonly("num_pairs", &BenchConfig::num_pairs)
        .def_property_readonly("pair_size", &BenchConfig::pair_size)
        .def("validate", &BenchConfig::validate);

    py::class_<BenchReport>(m, "BenchReport")
        .def_readonly("config", &BenchReport::config)
        .def_readonly("num_pairs", &BenchReport::num_pairs)
        .def_readonly("node_count", &BenchReport::node_count)
        .def_readonly("placement", &BenchReport::placement)
        .def_readonly("measurement", &BenchReport::measurement)
        .def_readonly("links", &BenchReport::links)
        .def_readonly("parent_page_mismatch", &BenchReport::parent_page_mismatch)
        .def_readonly("max_resident_pages", &BenchReport::max_resident_pages)
        .def_readonly("scanned_pairs", &BenchReport::scanned_pairs)
        .def_readonly("updates", &BenchReport::updates)
        .def_property_readonly("purely_local_capacity_bytes",
                               [](const BenchReport& r) { return r.space.purely_local_capacity_bytes; })
        .def_property_readonly("cache_capacity_pages",
                               [](const BenchReport& r) { return r.space.cache_capacity_pages; });

    m.def("run_benchmark", &run_benchmark, py::arg("config"), py::call_guard<py::gil_scoped_release>(),
          "Placement phase, optional rearrangement, then the measured query phase.");

    m.def("variants", [] {
        return std::vector<std::string>{"plain",          "hint",           "local",          "dfs",
                                        "local+dfs",      "veb",            "local+veb",      "skiplist:plain",
                                        "skiplist:hint",  "skiplist:local", "skiplist:page",  "skiplist:local+page"};
    });
}
