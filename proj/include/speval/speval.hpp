// speval/speval.hpp
//
// Copyright 2026 The speval authors
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

#ifndef SPEVAL_SPEVAL_HPP_
#define SPEVAL_SPEVAL_HPP_

#include "speval/common.hpp"
#include "speval/dataset.hpp"
#include "speval/embeddings.hpp"
#include "speval/evaluate.hpp"
#include "speval/features.hpp"
#include "speval/manifest.hpp"
#include "speval/metrics.hpp"
#include "speval/phoneme_table.hpp"
#include "speval/posterior.hpp"
#include "speval/scorer.hpp"
#include "speval/synth.hpp"
#include "speval/trainer.hpp"

#endif  // SPEVAL_SPEVAL_HPP_
