#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fiducial/engine.hpp"

namespace fiducial {

// Shortest decimal form that round-trips a 64-bit float exactly.
std::string format_double(double v);

void write_samples_csv(const std::string& path, const SampleSet& set);

struct Histogram {
    std::vector<double> left, right;
    std::vector<std::int64_t> count;
};

// Equal-width bins spanning [min, max] exactly; a single-valued sample
// collapses to one bin.
Histogram make_histogram(std::span<const double> values, int bins);
void write_histogram_csv(const std::string& path, const Histogram& h);

}  // namespace fiducial
