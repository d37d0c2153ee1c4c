// Copyright 2026 The tdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the numerical core.

#ifndef TDP_TDP_HPP_
#define TDP_TDP_HPP_

#include "tdp/certification.hpp"
#include "tdp/error.hpp"
#include "tdp/estimators.hpp"
#include "tdp/graph.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/spaces.hpp"
#include "tdp/tangent_maps.hpp"

#endif  // TDP_TDP_HPP_
