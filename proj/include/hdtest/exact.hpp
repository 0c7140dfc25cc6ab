// Copyright 2026 The hdtest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact integer and rational arithmetic for the combinatorial identities.

#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace hdtest {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt factorial(std::uint64_t k) {
  BigInt out = 1;
  for (std::uint64_t i = 2; i <= k; ++i) out *= i;
  return out;
}

inline BigInt binomial(std::uint64_t top, std::uint64_t bottom) {
  if (bottom > top) return 0;
  if (bottom > top - bottom) bottom = top - bottom;
  BigInt out = 1;
  for (std::uint64_t i = 1; i <= bottom; ++i) {
    out *= top - bottom + i;
    out /= i;
  }
  return out;
}

}  // namespace hdtest
