#include "fiducial/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fiducial {

std::string format_double(double v) {
    char buf[40];
    // 17 significant digits round-trip any double.
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_samples_csv(const std::string& path, const SampleSet& set) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "chain_id";
    for (const auto& name : set.coordinate_names) out << ',' << name;
    out << '\n';
    for (std::int64_t b = 0; b < set.B; ++b) {
        out << b;
        for (double v : set.row(b)) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Histogram make_histogram(std::span<const double> values, int bins) {
    if (values.empty()) throw std::invalid_argument("make_histogram: empty input");
    if (bins < 1) throw std::invalid_argument("make_histogram: bins must be >= 1");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        if (std::isnan(v)) throw std::invalid_argument("make_histogram: NaN in input");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Histogram h;
    if (lo == hi) {
        h.left = {lo};
        h.right = {hi};
        h.count = {static_cast<std::int64_t>(values.size())};
        return h;
    }
    const double width = (hi - lo) / bins;
    h.left.resize(bins);
    h.right.resize(bins);
    h.count.assign(bins, 0);
    for (int i = 0; i < bins; ++i) {
        h.left[i] = lo + i * width;
        h.right[i] = i + 1 == bins ? hi : lo + (i + 1) * width;
    }
    for (double v : values) {
        auto i = static_cast<std::int64_t>((v - lo) / width);
        i = std::clamp<std::int64_t>(i, 0, bins - 1);
        ++h.count[i];
    }
    return h;
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i < h.count.size(); ++i)
        out << format_double(h.left[i]) << ',' << format_double(h.right[i]) << ',' << h.count[i]
            << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace fiducial
