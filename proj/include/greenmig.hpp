/*
 * Copyright 2026 The greenmig Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef GREENMIG_HPP
#define GREENMIG_HPP

#include <greenmig/topology.hpp>
#include <greenmig/spectrum.hpp>
#include <greenmig/energy.hpp>
#include <greenmig/workload.hpp>
#include <greenmig/heuristics.hpp>
#include <greenmig/verify.hpp>
#include <greenmig/exact.hpp>
#include <greenmig/experiment.hpp>

#endif // GREENMIG_HPP
