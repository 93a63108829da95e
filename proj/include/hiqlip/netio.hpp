// Copyright 2026 The hiqlip Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hiqlip/matrix.hpp"

namespace hiqlip {

/// Raised by network loading and validation. `layer` is 1-based when the
/// problem is attributable to a single layer.
class NetworkError : public std::runtime_error {
public:
    enum class Kind { io, parse, shape, value };

    NetworkError(Kind kind, std::optional<std::size_t> layer, const std::string& what)
        : std::runtime_error(what), kind_(kind), layer_(layer) {}

    Kind kind() const noexcept { return kind_; }
    std::optional<std::size_t> layer() const noexcept { return layer_; }

private:
    Kind kind_;
    std::optional<std::size_t> layer_;
};

enum class Activation { relu };

/// One dense layer, stored out x in (row = output neuron).
struct WeightMatrix {
    Matrix weights;
    std::optional<std::vector<double>> bias;

    std::size_t rows() const noexcept { return weights.rows(); }
    std::size_t cols() const noexcept { return weights.cols(); }
};

/// Feedforward ReLU network. Immutable once constructed; the constructor
/// enforces the shape chain and finiteness of every weight and bias.
///
/// Biases are carried along so files round-trip, but the Lipschitz
/// estimators never read them: the input gradient does not depend on b.
class Network {
public:
    explicit Network(std::vector<WeightMatrix> layers, nlohmann::json metadata = nlohmann::json::object());

    std::size_t depth() const noexcept { return layers_.size(); }
    const WeightMatrix& layer(std::size_t index) const { return layers_.at(index); }
    const std::vector<WeightMatrix>& layers() const noexcept { return layers_; }
    Activation activation() const noexcept { return Activation::relu; }
    const nlohmann::json& metadata() const noexcept { return metadata_; }

    std::size_t input_dim() const noexcept { return layers_.front().cols(); }
    std::size_t output_dim() const noexcept { return layers_.back().rows(); }
    /// Widths of the d-1 hidden layers.
    std::vector<std::size_t> hidden_widths() const;
    std::size_t hidden_units() const;

private:
    std::vector<WeightMatrix> layers_;
    nlohmann::json metadata_;
};

inline constexpr std::string_view kNetworkFormat = "hiqlip-net-v1";

Network parse_network(std::string_view text);
Network load_network(const std::filesystem::path& path);
std::string serialize_network(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

/// Deterministic random network. Entries are i.i.d. uniform in
/// [-scale, scale], drawn layer by layer in row-major order from
/// std::mt19937_64 seeded with `seed` (see Rng). No biases.
Network generate_synthetic(std::uint64_t seed, std::span<const std::size_t> dims, double scale);

/// Two-layer subnetwork collapsed onto one output: first-layer weights
/// (m x n, out x in), output row u (length m) and A = W^T diag(u) (n x m).
struct ClassReduction {
    Matrix weights;
    std::vector<double> u;
    Matrix a;
};

ClassReduction make_reduction(Matrix weights, std::vector<double> u);
ClassReduction class_reduction(const Network& net, std::size_t class_index);

/// Row `class_index` of the last layer.
std::vector<double> class_row(const Network& net, std::size_t class_index);

/// The network's weight matrices with the last one replaced by the 1 x h
/// class row. This is the chain whose product is the class gradient.
std::vector<Matrix> class_chain(const Network& net, std::size_t class_index);

}  // namespace hiqlip
