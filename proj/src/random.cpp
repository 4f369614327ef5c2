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

#include "stbf/random.hpp"

#include <array>

namespace stbf
{
    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    Rng make_stream(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose, std::uint64_t index)
    {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ trial);
        h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
        h = splitmix64(h ^ index);

        std::array<std::uint32_t, 8> words{};
        std::uint64_t s = h;
        for (std::size_t i = 0; i < words.size(); i += 2)
        {
            s = splitmix64(s);
            words[i] = static_cast<std::uint32_t>(s);
            words[i + 1] = static_cast<std::uint32_t>(s >> 32);
        }
        std::seed_seq seq(words.begin(), words.end());
        return Rng(seq);
    }
}
