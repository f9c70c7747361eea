// Copyright 2026 The massdist Authors
//
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

#ifndef MASSDIST_MASSDIST_HPP_
#define MASSDIST_MASSDIST_HPP_

#include "massdist/actions.hpp"
#include "massdist/baselines.hpp"
#include "massdist/catalog.hpp"
#include "massdist/dynamics.hpp"
#include "massdist/error.hpp"
#include "massdist/estimation.hpp"
#include "massdist/experiment.hpp"
#include "massdist/io.hpp"
#include "massdist/metrics.hpp"
#include "massdist/object_model.hpp"
#include "massdist/planar.hpp"
#include "massdist/rng.hpp"
#include "massdist/synthetic.hpp"

#endif  // MASSDIST_MASSDIST_HPP_
