#pragma once

// In-memory form of a persisted model: algorithm tag, hyperparameters,
// feature-space descriptor and named parameter arrays with explicit shapes.

#include <json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace szbp {

/// Row-major parameter block.
struct NamedArray {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;

    bool operator==(const NamedArray&) const = default;
};

/// Finds an array by name; throws DataError if missing.
const NamedArray& find_array(const std::vector<NamedArray>& arrays, const std::string& name);

struct ModelArtifact {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    std::string algorithm;
    nlohmann::json hyperparameters = nlohmann::json::object();
    nlohmann::json feature_descriptor = nlohmann::json::object();
    std::vector<NamedArray> parameters;
};

}  // namespace szbp
