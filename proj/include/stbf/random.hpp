// SPDX-License-Identifier: Apache-2.0
//
// leo-stbf: space-time beamforming for LEO satellite interference networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>

#include "stbf/types.hpp"

namespace stbf
{
    /// Purposes keep streams for geometry, fading and CSIT errors disjoint.
    enum class StreamPurpose : std::uint64_t
    {
        geometry = 1,
        link = 2,
        csit = 3,
        sampling = 4, // statistical self-checks
    };

    /// Independent generator fully determined by (seed, trial, purpose, index).
    /// The key is mixed with splitmix64 before seeding, so neighbouring keys do not
    /// yield correlated Mersenne-Twister states.
    Rng make_stream(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose, std::uint64_t index = 0);

    std::uint64_t splitmix64(std::uint64_t x);
}
