/*
 * Copyright 2026 The gamma-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header for the gamma-audit library.

#ifndef GAMMA_AUDIT_GAMMA_AUDIT_HPP_
#define GAMMA_AUDIT_GAMMA_AUDIT_HPP_

#include "gamma_audit/data_io.hpp"
#include "gamma_audit/disqualification.hpp"
#include "gamma_audit/errors.hpp"
#include "gamma_audit/fair_erm.hpp"
#include "gamma_audit/metrics.hpp"
#include "gamma_audit/parallel.hpp"
#include "gamma_audit/pareto.hpp"
#include "gamma_audit/report.hpp"
#include "gamma_audit/scaling.hpp"
#include "gamma_audit/simplex_qp.hpp"
#include "gamma_audit/theorems.hpp"
#include "gamma_audit/types.hpp"

#endif  // GAMMA_AUDIT_GAMMA_AUDIT_HPP_
