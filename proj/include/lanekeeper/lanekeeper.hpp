// Copyright 2026 The Lanekeeper Authors
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

#pragma once

#include "lanekeeper/capture.hpp"
#include "lanekeeper/config.hpp"
#include "lanekeeper/control.hpp"
#include "lanekeeper/errors.hpp"
#include "lanekeeper/eval.hpp"
#include "lanekeeper/image.hpp"
#include "lanekeeper/infer.hpp"
#include "lanekeeper/json_io.hpp"
#include "lanekeeper/kv.hpp"
#include "lanekeeper/lane_core.hpp"
#include "lanekeeper/pipeline.hpp"
#include "lanekeeper/scene.hpp"
#include "lanekeeper/sim.hpp"
#include "lanekeeper/stats.hpp"
#include "lanekeeper/y4m.hpp"
