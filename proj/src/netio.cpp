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

#include "hiqlip/netio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hiqlip/rng.hpp"

namespace hiqlip {

namespace {

using nlohmann::json;

std::string layer_prefix(std::size_t layer) { return "layer " + std::to_string(layer) + ": "; }

[[noreturn]] void fail(NetworkError::Kind kind, std::size_t layer, const std::string& what) {
    throw NetworkError(kind, layer, layer_prefix(layer) + what);
}

// JSON has no NaN/Inf literals; writers that emit them as strings get a
// value error rather than a parse error.
bool is_nonfinite_token(const std::string& s) {
    static const char* tokens[] = {"NaN", "nan", "Infinity", "-Infinity", "inf", "-inf", "Inf", "-Inf"};
    for (const char* t : tokens)
        if (s == t) return true;
    return false;
}

double read_number(const json& v, std::size_t layer, const char* what) {
    if (v.is_number()) {
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(NetworkError::Kind::value, layer, std::string("non-finite ") + what);
        return x;
    }
    if (v.is_string() && is_nonfinite_token(v.get<std::string>()))
        fail(NetworkError::Kind::value, layer, std::string("non-finite ") + what + " \"" + v.get<std::string>() + "\"");
    fail(NetworkError::Kind::parse, layer, std::string(what) + " is not a number");
}

std::size_t read_dim(const json& layer_json, const char* key, std::size_t layer) {
    auto it = layer_json.find(key);
    if (it == layer_json.end() || !it->is_number_unsigned())
        fail(NetworkError::Kind::parse, layer, std::string("missing or invalid \"") + key + "\"");
    return it->get<std::size_t>();
}

WeightMatrix parse_layer(const json& lj, std::size_t layer) {
    if (!lj.is_object()) fail(NetworkError::Kind::parse, layer, "layer is not an object");
    const std::size_t out = read_dim(lj, "out", layer);
    const std::size_t in = read_dim(lj, "in", layer);
    if (out == 0 || in == 0) fail(NetworkError::Kind::shape, layer, "empty layer");
    auto wit = lj.find("weights");
    if (wit == lj.end() || !wit->is_array()) fail(NetworkError::Kind::parse, layer, "missing \"weights\"");
    if (wit->size() != out)
        fail(NetworkError::Kind::shape, layer,
             "weights has " + std::to_string(wit->size()) + " rows, expected " + std::to_string(out));
    Matrix w(out, in);
    for (std::size_t r = 0; r < out; ++r) {
        const json& row = (*wit)[r];
        if (!row.is_array()) fail(NetworkError::Kind::parse, layer, "weight row is not an array");
        if (row.size() != in)
            fail(NetworkError::Kind::shape, layer,
                 "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " entries, expected " +
                     std::to_string(in));
        for (std::size_t c = 0; c < in; ++c) w(r, c) = read_number(row[c], layer, "weight");
    }
    WeightMatrix wm{std::move(w), std::nullopt};
    if (auto bit = lj.find("bias"); bit != lj.end() && !bit->is_null()) {
        if (!bit->is_array()) fail(NetworkError::Kind::parse, layer, "bias is not an array");
        if (bit->size() != out)
            fail(NetworkError::Kind::shape, layer,
                 "bias has " + std::to_string(bit->size()) + " entries, expected " + std::to_string(out));
        std::vector<double> b(out);
        for (std::size_t r = 0; r < out; ++r) b[r] = read_number((*bit)[r], layer, "bias");
        wm.bias = std::move(b);
    }
    return wm;
}

}  // namespace

Network::Network(std::vector<WeightMatrix> layers, nlohmann::json metadata)
    : layers_(std::move(layers)), metadata_(std::move(metadata)) {
    if (layers_.empty()) throw NetworkError(NetworkError::Kind::shape, std::nullopt, "network has no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& wm = layers_[l];
        if (wm.rows() == 0 || wm.cols() == 0) fail(NetworkError::Kind::shape, l + 1, "empty layer");
        if (l > 0 && wm.cols() != layers_[l - 1].rows())
            fail(NetworkError::Kind::shape, l + 1,
                 "input dimension " + std::to_string(wm.cols()) + " does not match output dimension " +
                     std::to_string(layers_[l - 1].rows()) + " of layer " + std::to_string(l));
        for (double x : wm.weights.data())
            if (!std::isfinite(x)) fail(NetworkError::Kind::value, l + 1, "non-finite weight");
        if (wm.bias) {
            if (wm.bias->size() != wm.rows()) fail(NetworkError::Kind::shape, l + 1, "bias length mismatch");
            for (double x : *wm.bias)
                if (!std::isfinite(x)) fail(NetworkError::Kind::value, l + 1, "non-finite bias");
        }
    }
    if (!metadata_.is_object()) metadata_ = nlohmann::json::object();
}

std::vector<std::size_t> Network::hidden_widths() const {
    std::vector<std::size_t> widths;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) widths.push_back(layers_[l].rows());
    return widths;
}

std::size_t Network::hidden_units() const {
    std::size_t total = 0;
    for (std::size_t w : hidden_widths()) total += w;
    return total;
}

Network parse_network(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw NetworkError(NetworkError::Kind::parse, std::nullopt, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw NetworkError(NetworkError::Kind::parse, std::nullopt, "top level is not an object");
    if (auto f = doc.find("format"); f == doc.end() || *f != kNetworkFormat)
        throw NetworkError(NetworkError::Kind::parse, std::nullopt,
                           "missing or unsupported \"format\" (expected hiqlip-net-v1)");
    if (auto a = doc.find("activation"); a != doc.end() && *a != "relu")
        throw NetworkError(NetworkError::Kind::parse, std::nullopt, "unsupported activation " + a->dump());
    auto lit = doc.find("layers");
    if (lit == doc.end() || !lit->is_array() || lit->empty())
        throw NetworkError(NetworkError::Kind::parse, std::nullopt, "missing or empty \"layers\"");

    std::vector<WeightMatrix> layers;
    for (std::size_t l = 0; l < lit->size(); ++l) {
        layers.push_back(parse_layer((*lit)[l], l + 1));
        if (l > 0 && layers[l].cols() != layers[l - 1].rows())
            fail(NetworkError::Kind::shape, l + 1,
                 "input dimension " + std::to_string(layers[l].cols()) + " does not match output dimension " +
                     std::to_string(layers[l - 1].rows()) + " of layer " + std::to_string(l));
    }
    json metadata = json::object();
    if (auto m = doc.find("metadata"); m != doc.end() && m->is_object()) metadata = *m;
    return Network(std::move(layers), std::move(metadata));
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NetworkError(NetworkError::Kind::io, std::nullopt, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string serialize_network(const Network& net) {
    json doc;
    doc["format"] = kNetworkFormat;
    doc["activation"] = "relu";
    json layers = json::array();
    for (const auto& wm : net.layers()) {
        json lj;
        lj["out"] = wm.rows();
        lj["in"] = wm.cols();
        json rows = json::array();
        for (std::size_t r = 0; r < wm.rows(); ++r) {
            auto row = wm.weights.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        lj["weights"] = std::move(rows);
        if (wm.bias) lj["bias"] = *wm.bias;
        layers.push_back(std::move(lj));
    }
    doc["layers"] = std::move(layers);
    doc["metadata"] = net.metadata();
    return doc.dump() + "\n";
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw NetworkError(NetworkError::Kind::io, std::nullopt, "cannot write " + path.string());
    out << serialize_network(net);
    if (!out) throw NetworkError(NetworkError::Kind::io, std::nullopt, "write failed for " + path.string());
}

Network generate_synthetic(std::uint64_t seed, std::span<const std::size_t> dims, double scale) {
    if (dims.size() < 2) throw std::invalid_argument("generate_synthetic: need at least two layer sizes");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("generate_synthetic: scale must be > 0");
    for (std::size_t d : dims)
        if (d == 0) throw std::invalid_argument("generate_synthetic: layer sizes must be positive");
    Rng rng(seed);
    std::vector<WeightMatrix> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Matrix w(dims[l + 1], dims[l]);
        for (double& x : w.data()) x = scale * (2.0 * rng.uniform() - 1.0);
        layers.push_back({std::move(w), std::nullopt});
    }
    json meta = json::object();
    meta["generator"] = "synthetic";
    meta["seed"] = seed;
    meta["scale"] = scale;
    return Network(std::move(layers), std::move(meta));
}

ClassReduction make_reduction(Matrix weights, std::vector<double> u) {
    if (u.size() != weights.rows()) throw std::invalid_argument("make_reduction: u length must equal hidden width");
    const std::size_t m = weights.rows();
    const std::size_t n = weights.cols();
    Matrix a(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) a(i, j) = weights(j, i) * u[j];
    return {std::move(weights), std::move(u), std::move(a)};
}

std::vector<double> class_row(const Network& net, std::size_t class_index) {
    const auto& last = net.layers().back();
    if (class_index >= last.rows())
        throw std::out_of_range("class index " + std::to_string(class_index) + " out of range (output dimension " +
                                std::to_string(last.rows()) + ")");
    auto row = last.weights.row(class_index);
    return {row.begin(), row.end()};
}

ClassReduction class_reduction(const Network& net, std::size_t class_index) {
    if (net.depth() != 2)
        throw std::invalid_argument("class_reduction requires depth 2, got " + std::to_string(net.depth()));
    return make_reduction(net.layer(0).weights, class_row(net, class_index));
}

std::vector<Matrix> class_chain(const Network& net, std::size_t class_index) {
    std::vector<Matrix> chain;
    for (std::size_t l = 0; l + 1 < net.depth(); ++l) chain.push_back(net.layer(l).weights);
    auto row = class_row(net, class_index);
    chain.emplace_back(1, row.size(), std::move(row));
    return chain;
}

}  // namespace hiqlip
