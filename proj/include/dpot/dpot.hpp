// Copyright 2026 The dpot Authors
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

#ifndef DPOT_DPOT_HPP_
#define DPOT_DPOT_HPP_

#include "dpot/admm.hpp"
#include "dpot/errors.hpp"
#include "dpot/experiments.hpp"
#include "dpot/local_solver.hpp"
#include "dpot/network.hpp"
#include "dpot/privacy.hpp"
#include "dpot/reference_solver.hpp"
#include "dpot/scenario.hpp"
#include "dpot/simulator.hpp"
#include "dpot/table.hpp"
#include "dpot/utility.hpp"

#endif  // DPOT_DPOT_HPP_
