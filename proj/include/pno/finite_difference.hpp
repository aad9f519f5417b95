// Copyright 2026 The pnobench Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PNO_FINITE_DIFFERENCE_HPP_
#define PNO_FINITE_DIFFERENCE_HPP_

#include <functional>

#include "pno/tensor.hpp"

namespace pno {

using ScalarFunction = std::function<double(const Tensor&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
/// Throws NumericError if f returns a non-finite value.
Tensor finite_difference_gradient(const ScalarFunction& f, const Tensor& at,
                                  double h = 1e-5);

/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|)
double max_relative_error(const Tensor& a, const Tensor& b);

}  // namespace pno

#endif  // PNO_FINITE_DIFFERENCE_HPP_
