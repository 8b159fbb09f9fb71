/* Copyright 2026 The DTM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>

// Elementwise loops on the hot path. Each has per-ISA clones selected at load
// time; none of them reassociates, so every clone gives the same bits.
namespace dtm::kernels {

void add_to(double* acc, const float* x, std::size_t n);
void add_to(double* acc, const double* x, std::size_t n);
void widen(double* out, const float* x, std::size_t n);
void scale(double* x, double s, std::size_t n);
void scale_into(float* out, const double* x, double s, std::size_t n);
void scale_into(double* out, const double* x, double s, std::size_t n);
bool all_finite(const float* x, std::size_t n);
bool all_finite(const double* x, std::size_t n);

}  // namespace dtm::kernels
