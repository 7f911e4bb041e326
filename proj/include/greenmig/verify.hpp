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

/**
 * \file greenmig/verify.hpp
 *
 * \brief Independent re-check of a migration-cycle outcome against the
 *  scenario it was computed from.
 *
 * The checker replays the batches on a fresh copy of the scenario's grid and
 * rebuilds every datacenter from the reported placement, so it shares no
 * state with the algorithm that produced the outcome.
 */

#ifndef GREENMIG_VERIFY_HPP
#define GREENMIG_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <greenmig/energy.hpp>
#include <greenmig/heuristics.hpp>
#include <greenmig/spectrum.hpp>
#include <greenmig/workload.hpp>

namespace greenmig {

/// What a migration cycle decided: batches in commit order and the final placement.
struct Outcome
{
	std::vector<MigrationBatch> batches;
	std::vector<std::size_t> vm_dc;
	std::vector<std::size_t> vm_server;
	double objective = 0;
	double obj2 = 0;
};

inline Outcome outcome_of(const CycleReport& r)
{
	return Outcome{r.log.batches, r.vm_dc, r.vm_server, r.obj, r.obj2};
}

struct Violation
{
	std::string invariant; // short key, e.g. "non-overlap"
	std::string detail;
};

/**
 * Lists every violated invariant: VM moved once, batch composition, path
 * validity, bandwidth cap, slot width, guard band, spectrum non-overlap and
 * continuity, per-link congestion cap, server cores and the reported costs.
 */
inline std::vector<Violation> check_outcome(const Scenario& sc, const Outcome& out, double tolerance = 1e-6)
{
	std::vector<Violation> v;
	const auto& p = sc.params;
	const auto& topo = *sc.topology;
	const std::size_t n_dc = sc.dc_count();
	auto fail = [&](const char* key, std::string detail) { v.push_back({key, std::move(detail)}); };

	if (out.vm_dc.size() != sc.vms.size() || out.vm_server.size() != sc.vms.size())
	{
		fail("placement", "placement does not cover every VM");
		return v;
	}

	std::vector<int> moved_by(sc.vms.size(), -1);
	std::vector<int> batches_from(n_dc, 0);
	SpectrumGrid grid = sc.grid;
	std::vector<int> batches_on_link(topo.link_count(), 0);

	for (std::size_t b = 0; b < out.batches.size(); ++b)
	{
		const auto& batch = out.batches[b];
		const std::string tag = "batch " + std::to_string(b + 1);
		if (batch.source_dc >= n_dc || batch.dest_dc >= n_dc || batch.source_dc == batch.dest_dc)
		{
			fail("batch-endpoints", tag + " has invalid endpoints");
			continue;
		}
		++batches_from[batch.source_dc];
		double theta = 0;
		for (VmId id : batch.vms)
		{
			if (id >= sc.vms.size())
			{
				fail("batch-vms", tag + " names unknown VM " + std::to_string(id));
				continue;
			}
			if (moved_by[id] >= 0)
			{
				fail("moved-once", "VM " + std::to_string(id) + " appears in batches " + std::to_string(moved_by[id] + 1) + " and " + std::to_string(b + 1));
			}
			moved_by[id] = int(b);
			if (sc.vms[id].home_dc != batch.source_dc)
			{
				fail("batch-vms", tag + " moves VM " + std::to_string(id) + " from a datacenter other than its home");
			}
			if (out.vm_dc[id] != batch.dest_dc)
			{
				fail("placement", "VM " + std::to_string(id) + " is not at the destination of " + tag);
			}
			theta += sc.vms[id].bandwidth_gbps;
		}
		if (batch.vms.empty())
		{
			fail("batch-vms", tag + " is empty");
		}
		if (std::abs(theta - batch.theta_gbps) > 1e-9)
		{
			fail("bandwidth", tag + " reports theta " + std::to_string(batch.theta_gbps) + " but its VMs need " + std::to_string(theta));
		}

		// path: a K-shortest candidate between the two datacenter nodes, contiguous
		const auto& candidates = sc.paths->between(batch.source_dc, batch.dest_dc);
		if (std::find(candidates.begin(), candidates.end(), batch.path) == candidates.end())
		{
			fail("path", tag + " uses a path outside the candidate set");
			continue;
		}
		const int level = modulation_level(batch.path, p.modulation);
		if (level != batch.modulation_level)
		{
			fail("modulation", tag + " reports the wrong modulation level");
		}
		if (batch.theta_gbps > p.kappa_gbps * level + 1e-9)
		{
			fail("kappa", tag + " exceeds the per-lightpath bandwidth cap");
		}
		if (batch.theta_gbps > 0 && batch.slots.width != slots_for_bandwidth(batch.theta_gbps, level, p.slot_rate_gbps))
		{
			fail("slot-width", tag + " has the wrong payload width");
		}
		if (batch.slots.guard != p.guard_slots)
		{
			fail("guard", tag + " has " + std::to_string(batch.slots.guard) + " guard slots");
		}
		if (batch.slots.start < 1 || batch.slots.width < 1 || batch.slots.end() > grid.capacity())
		{
			fail("spectrum-bounds", tag + " lies outside the grid");
			continue;
		}
		bool clash = false;
		for (LinkId l : batch.path.links)
		{
			for (int s = batch.slots.start; s <= batch.slots.end(); ++s)
			{
				if (grid.occupied(l, s))
				{
					fail("non-overlap", tag + " overlaps slot " + std::to_string(s) + " on link " + topo.link_name(l));
					clash = true;
					break;
				}
			}
		}
		if (!clash)
		{
			grid.occupy(batch.path, batch.slots);
			for (LinkId l : batch.path.links)
			{
				++batches_on_link[l];
			}
		}
	}

	if (p.h_max > 0)
	{
		for (std::size_t d = 0; d < n_dc; ++d)
		{
			if (batches_from[d] > p.h_max)
			{
				fail("h-max", "datacenter " + std::to_string(d) + " sends " + std::to_string(batches_from[d]) + " batches");
			}
		}
	}

	const int limit = congestion_limit_slots(grid, p.upsilon_max);
	for (LinkId l = 0; l < topo.link_count(); ++l)
	{
		if (batches_on_link[l] == 0)
		{
			continue;
		}
		int used = grid.used_slots(l);
		if (!grid.guard_counts_toward_congestion())
		{
			used -= batches_on_link[l] * p.guard_slots;
		}
		if (used > limit)
		{
			fail("congestion-cap", "link " + topo.link_name(l) + " holds " + std::to_string(used) + " slots, cap " + std::to_string(limit));
		}
	}

	// rebuild datacenters from the reported placement
	std::vector<Datacenter> dcs;
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		dcs.emplace_back(m, topo.dc_nodes()[m], p.servers_per_dc, p.cores_per_server, sc.alpha[m], sc.beta[m], sc.renewable[m]);
	}
	for (const auto& vm : sc.vms)
	{
		const std::size_t m = out.vm_dc[vm.id];
		const std::size_t n = out.vm_server[vm.id];
		if (m >= n_dc || n >= dcs[m].servers.size())
		{
			fail("placement", "VM " + std::to_string(vm.id) + " placed on an unknown server");
			continue;
		}
		if (moved_by[vm.id] < 0 && m != vm.home_dc)
		{
			fail("placement", "VM " + std::to_string(vm.id) + " left its home without a batch");
		}
		dcs[m].servers[n].used_cores += vm.cores;
		dcs[m].servers[n].hosted.push_back(vm.id);
	}
	for (const auto& dc : dcs)
	{
		for (std::size_t n = 0; n < dc.servers.size(); ++n)
		{
			if (dc.servers[n].used_cores > dc.cores_per_server)
			{
				fail("cores", "datacenter " + std::to_string(dc.id) + " server " + std::to_string(n) + " uses " +
				                  std::to_string(dc.servers[n].used_cores) + " cores");
			}
		}
	}
	if (!v.empty())
	{
		return v;
	}

	std::vector<MigrationCharge> charges;
	for (const auto& b : out.batches)
	{
		charges.push_back({b.source_dc, b.theta_gbps, 1});
	}
	const double obj2 = brown_cost(dcs, p.power, p.static_mode);
	const double obj = obj2 + migration_cost(dcs, charges);
	if (std::abs(obj2 - out.obj2) > tolerance * std::max(1.0, std::abs(obj2)))
	{
		fail("obj2", "reported " + std::to_string(out.obj2) + ", recomputed " + std::to_string(obj2));
	}
	if (std::abs(obj - out.objective) > tolerance * std::max(1.0, std::abs(obj)))
	{
		fail("objective", "reported " + std::to_string(out.objective) + ", recomputed " + std::to_string(obj));
	}
	return v;
}

} // namespace greenmig

#endif // GREENMIG_VERIFY_HPP
