#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epispread {

// Column-major table of per-node features.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    // Raw range of each column before normalisation.
    std::vector<double> raw_min;
    std::vector<double> raw_max;

    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t cols() const noexcept { return columns.size(); }

    std::optional<std::size_t> find(const std::string& name) const;

    void add_column(std::string name, std::vector<double> values);

    // Copy restricted to the given rows, in the given order.
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
};

}  // namespace epispread
