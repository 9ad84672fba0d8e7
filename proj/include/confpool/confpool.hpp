// Copyright 2026 The confpool Authors
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

#pragma once

#include "confpool/categorical.hpp"
#include "confpool/dual_vector.hpp"
#include "confpool/errors.hpp"
#include "confpool/io.hpp"
#include "confpool/learner.hpp"
#include "confpool/loss.hpp"
#include "confpool/metrics.hpp"
#include "confpool/opinion_pool.hpp"
#include "confpool/rng.hpp"
#include "confpool/simulation.hpp"
