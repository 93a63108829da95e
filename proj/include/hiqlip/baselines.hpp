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
#include <span>
#include <stdexcept>
#include <vector>

#include "hiqlip/estimate.hpp"
#include "hiqlip/netio.hpp"

namespace hiqlip {

/// ||u||_1 * prod_{l<d} ||W_l||_{inf->inf}, u the class row.
Estimate mp_bound(const Network& net, std::size_t class_index);

struct SamplingConfig {
    std::size_t num_samples = 200000;
    double domain_low = 0.0;
    double domain_high = 1.0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const;
};

/// Input gradient of output `class_index` at x (biases included in the
/// forward pass; a zero pre-activation counts as inactive).
std::vector<double> input_gradient(const Network& net, std::size_t class_index, std::span<const double> x);

/// Max ||grad f||_1 over sampled inputs. Coordinate c of sample i is drawn
/// from a SplitMix64 counter stream keyed by (seed, i, c), so the first k
/// samples are the same for every sample budget and every thread count.
Estimate sampling_lower_bound(const Network& net, std::size_t class_index, const SamplingConfig& cfg);

class RefusalError : public std::runtime_error {
public:
    RefusalError(const std::string& what, std::size_t required_cap)
        : std::runtime_error(what), required_cap_(required_cap) {}
    std::size_t required_cap() const noexcept { return required_cap_; }

private:
    std::size_t required_cap_;
};

inline constexpr std::size_t kDefaultBruteForceCap = 22;

/// Exact FGL: max over all 2^H joint activation patterns of the l1 norm of
/// the class gradient. Throws RefusalError when H exceeds `cap`.
Estimate brute_force_fgl(const Network& net, std::size_t class_index, std::size_t cap = kDefaultBruteForceCap);

}  // namespace hiqlip
