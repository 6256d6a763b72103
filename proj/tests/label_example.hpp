// tests/label_example.hpp

// Copyright 2026 The yoho-sed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <vector>

#include "yoho/label_codec.hpp"

namespace yoho::test {

// Reference label grid for an 8 s clip with music over [0.2, 4.3] s and
// speech over [3.6, 6.0] s, 26 steps. Columns: speech presence, music presence.
inline constexpr std::array<std::array<int, 2>, 26> kExamplePresence = {{
    {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {1, 1}, {1, 1},
    {1, 1}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0},
}};

struct ExampleValue {
  std::size_t step;
  const char* cls;
  int slot;  // 1 = start, 2 = stop
  double value;
};

// Fractional boundaries printed in the grid (rounded to 2-3 decimals there).
inline const std::vector<ExampleValue> kExampleFractions = {
    {0, "music", 1, 0.65}, {13, "music", 2, 0.975}, {11, "speech", 1, 0.7}, {19, "speech", 2, 0.5}};

inline EventList example_events() { return {{"music", 0.2, 4.3}, {"speech", 3.6, 6.0}}; }
inline std::vector<std::string> example_classes() { return {"speech", "music"}; }

}  // namespace yoho::test
