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

#include <span>
#include <utility>
#include <vector>

#include "hiqlip/estimate.hpp"
#include "hiqlip/hierarchy.hpp"
#include "hiqlip/matrix.hpp"
#include "hiqlip/netio.hpp"

namespace hiqlip {

/// Witness of max x^T W_k D_{k-1} ... D_1 W_1 y over sign vectors x, y and
/// binary activation patterns D.
struct BlockMaximum {
    double value = 0.0;
    std::vector<std::vector<Spin>> activations;  // D_1 .. D_{k-1}, entries 0/1
    std::vector<Spin> x;                         // output side
    std::vector<Spin> y;                         // input side
    std::vector<double> trace;                   // objective after each accepted pass
    std::size_t passes = 0;
};

/// x^T W_k D_{k-1} ... D_1 W_1 y.
double block_objective(std::span<const Matrix> layers, std::span<const std::vector<Spin>> activations,
                       std::span<const Spin> x, std::span<const Spin> y);

/// Alternating maximization over a chain of layers (out x in, input first).
/// Starts from D = 1 plus cfg.recursion_restarts random patterns and keeps
/// the best witness.
BlockMaximum maximize_block(std::span<const Matrix> layers, const HiqConfig& cfg, std::uint64_t stream = 0);

Estimate layerwise_recursion(const Network& net, std::size_t class_index, const HiqConfig& cfg);

struct BlockPlan {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [first, last) layer indices
    std::size_t max_len = 1;
};

BlockPlan plan_blocks(std::size_t depth, std::size_t b);

Estimate block_product(const Network& net, std::size_t class_index, std::size_t b, const HiqConfig& cfg);

enum class MpVariant { A, B };

/// A: 1/2^{d-2}. B: 1/(2^{d-2} d^{d-3}).
double mp_coefficient(std::size_t d, MpVariant variant);

/// Which matrices enter the product estimator.
enum class Pairing {
    overlapping,  // (W_l, W_{l+1}) for l = 1..d-1, class row for the last pair
    single,       // ||W_{l+1}||_{inf->1} for l = 1..d-1
};

struct PairConstants {
    std::size_t depth = 0;
    std::vector<double> gammas;
    Pairing pairing = Pairing::overlapping;
    double wall_time_s = 0.0;
    std::string config_digest;
};

PairConstants pair_constants(const Network& net, std::size_t class_index, const HiqConfig& cfg,
                             Pairing pairing = Pairing::overlapping);

/// mp_coefficient(d, variant) times the product of the cached constants.
Estimate hiq_lip_multilayer(const PairConstants& pairs, MpVariant variant);
Estimate hiq_lip_multilayer(const Network& net, std::size_t class_index, MpVariant variant, const HiqConfig& cfg,
                            Pairing pairing = Pairing::overlapping);

}  // namespace hiqlip
