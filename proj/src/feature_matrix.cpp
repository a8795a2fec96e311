#include "epispread/feature_matrix.hpp"

#include <algorithm>

#include "epispread/error.hpp"

namespace epispread {

std::optional<std::size_t> FeatureMatrix::find(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

void FeatureMatrix::add_column(std::string name, std::vector<double> values) {
    if (!columns.empty() && values.size() != rows())
        throw SchemaError("column '" + name + "' has " + std::to_string(values.size()) +
                          " rows, expected " + std::to_string(rows()));
    if (find(name)) throw SchemaError("duplicate column '" + name + "'");
    double lo = 0.0, hi = 0.0;
    if (!values.empty()) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
    }
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
    raw_min.push_back(lo);
    raw_max.push_back(hi);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.names = names;
    out.raw_min = raw_min;
    out.raw_max = raw_max;
    out.columns.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out.columns[c].reserve(rows.size());
        for (auto r : rows) out.columns[c].push_back(columns[c].at(r));
    }
    return out;
}

}  // namespace epispread
