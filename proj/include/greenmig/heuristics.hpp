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
 * \file greenmig/heuristics.hpp
 *
 * \brief Anycast migration heuristics (shortest path, maximum-bandwidth
 *  path, ergodic path, joint-resource ergodic) and per-cycle orchestration.
 *
 * All four split the many-to-many migration demand into a sequence of
 * single source / single destination batches. A batch is committed only
 * when its routing and spectrum assignment succeeds and it strictly lowers
 * brown cost plus migration cost.
 */

#ifndef GREENMIG_HEURISTICS_HPP
#define GREENMIG_HEURISTICS_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <greenmig/energy.hpp>
#include <greenmig/spectrum.hpp>
#include <greenmig/topology.hpp>
#include <greenmig/workload.hpp>

namespace greenmig {

enum class Algorithm
{
	none,
	sp,
	mp,
	ep,
	jre
};

inline std::string_view to_string(Algorithm a)
{
	switch (a)
	{
		case Algorithm::none: return "none";
		case Algorithm::sp: return "sp";
		case Algorithm::mp: return "mp";
		case Algorithm::ep: return "ep";
		case Algorithm::jre: return "jre";
	}
	return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
	for (Algorithm a : {Algorithm::none, Algorithm::sp, Algorithm::mp, Algorithm::ep, Algorithm::jre})
	{
		if (to_string(a) == s)
		{
			return a;
		}
	}
	throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected none|sp|mp|ep|jre)");
}

struct MigrationBatch
{
	std::size_t index = 0; // h, 1-based in commit order
	std::size_t source_dc = 0;
	std::size_t dest_dc = 0;
	std::vector<VmId> vms;
	double theta_gbps = 0;
	Path path;
	int modulation_level = 1;
	SlotRange slots;

	friend bool operator==(const MigrationBatch&, const MigrationBatch&) = default;
};

struct MigrationLog
{
	std::vector<MigrationBatch> batches;
	int blocked_attempts = 0;
	std::vector<std::size_t> excluded; // D_out, in insertion order

	std::size_t migrated_vms() const
	{
		std::size_t n = 0;
		for (const auto& b : batches)
		{
			n += b.vms.size();
		}
		return n;
	}

	std::vector<MigrationCharge> charges() const
	{
		std::vector<MigrationCharge> out;
		for (const auto& b : batches)
		{
			out.push_back({b.source_dc, b.theta_gbps, 1});
		}
		return out;
	}

	friend bool operator==(const MigrationLog&, const MigrationLog&) = default;
};

/// Batch contents before spectrum assignment.
struct BatchPlan
{
	std::vector<VmId> vms;
	double theta_gbps = 0;
	int modulation_level = 1;
	int width_slots = 0;
};

/**
 * Mutable state of one migration cycle: live datacenters, spectrum and the
 * remaining designated out-VMs of every source.
 */
class CycleState
{
public:
	explicit CycleState(const Scenario& sc)
	: scenario_(&sc),
	  dcs(sc.initial_datacenters()),
	  vms(sc.vms),
	  grid(sc.grid)
	{
		demand = suboptimal_allocation(dcs, vms, sc.params);
		pending = demand.out_vms;
		batches_from.assign(dcs.size(), 0);
		excluded.assign(dcs.size(), false);
		is_source.assign(dcs.size(), false);
		for (std::size_t s : demand.sources)
		{
			is_source[s] = true;
		}
	}

	const Scenario& scenario() const { return *scenario_; }
	const SimulationParams& params() const { return scenario_->params; }

	double headroom(std::size_t dc) const { return renewable_headroom(dcs[dc], params().power, params().static_mode); }
	double brown(std::size_t dc) const { return brown_energy(dcs[dc], params().power, params().static_mode); }

	/// D_s: sources with pending VMs, not excluded, below h_max.
	std::vector<std::size_t> live_sources() const
	{
		std::vector<std::size_t> out;
		for (std::size_t s = 0; s < dcs.size(); ++s)
		{
			if (is_source[s] && !excluded[s] && !pending[s].empty() &&
			    (params().h_max == 0 || batches_from[s] < params().h_max))
			{
				out.push_back(s);
			}
		}
		return out;
	}

	/// D_d: non-source datacenters with renewable headroom and a free core.
	std::vector<std::size_t> live_sinks() const
	{
		std::vector<std::size_t> out;
		for (std::size_t d = 0; d < dcs.size(); ++d)
		{
			if (!is_source[d] && !excluded[d] && headroom(d) > 0 && dcs[d].free_cores() > 0)
			{
				out.push_back(d);
			}
		}
		return out;
	}

	/// Dynamic watts still designated to leave a source.
	double pending_watts(std::size_t s) const
	{
		double w = 0;
		for (VmId id : pending[s])
		{
			w += vms[id].cores * params().dynamic_per_core();
		}
		return w;
	}

	const std::vector<Path>& candidate_paths(std::size_t s, std::size_t d) const { return scenario_->paths->between(s, d); }

private:
	const Scenario* scenario_;

public:
	std::vector<Datacenter> dcs;
	std::vector<VmRequest> vms;
	SpectrumGrid grid;
	MigrationDemand demand;
	std::vector<std::vector<VmId>> pending;
	std::vector<int> batches_from;
	std::vector<bool> excluded;
	std::vector<bool> is_source;
	MigrationLog log;
};

/**
 * Packs the source's pending VMs in ascending bandwidth order while the
 * total stays within kappa * L(path), the destination has the cores, and its
 * renewable headroom covers the added power. Returns nullopt if nothing fits.
 */
inline std::optional<BatchPlan> build_batch(const CycleState& st, std::size_t source, std::size_t dest, const Path& path)
{
	const auto& p = st.params();
	BatchPlan plan;
	plan.modulation_level = modulation_level(path, p.modulation);
	const double cap = p.kappa_gbps * plan.modulation_level;
	const Datacenter& dst = st.dcs[dest];

	std::vector<VmRequest> accepted;
	for (VmId id : st.pending[source])
	{
		const VmRequest& v = st.vms[id];
		if (plan.theta_gbps + v.bandwidth_gbps > cap + 1e-9)
		{
			continue;
		}
		accepted.push_back(v);
		auto where = ffd_placement(dst, accepted);
		bool ok = where.has_value();
		if (ok)
		{
			Datacenter trial = dst;
			place_vms(trial, accepted);
			ok = dc_power(trial, p.power, p.static_mode) <= trial.renewable_budget + 1e-9;
		}
		if (!ok)
		{
			accepted.pop_back();
			continue;
		}
		plan.theta_gbps += v.bandwidth_gbps;
		plan.vms.push_back(id);
	}
	if (plan.vms.empty())
	{
		return std::nullopt;
	}
	plan.width_slots = slots_for_bandwidth(plan.theta_gbps, plan.modulation_level, p.slot_rate_gbps);
	return plan;
}

namespace detail {

inline std::vector<VmRequest> gather(const CycleState& st, const std::vector<VmId>& ids)
{
	std::vector<VmRequest> out;
	for (VmId id : ids)
	{
		out.push_back(st.vms[id]);
	}
	return out;
}

} // namespace detail

/**
 * Builds, routes and commits one batch. Returns false (state unchanged) when
 * the batch is empty, the spectrum is blocked, or the move would not lower
 * the objective.
 */
inline bool try_migrate(CycleState& st, std::size_t source, std::size_t dest, const Path& path)
{
	const auto& p = st.params();
	auto plan = build_batch(st, source, dest, path);
	if (!plan)
	{
		return false;
	}
	auto range = first_fit_allocate(st.grid, path, plan->width_slots, p.guard_slots, p.upsilon_max);
	if (!range)
	{
		return false;
	}
	const auto moved = detail::gather(st, plan->vms);
	Datacenter src_after = st.dcs[source];
	Datacenter dst_after = st.dcs[dest];
	remove_vms(src_after, moved);
	place_vms(dst_after, moved);
	const double delta = st.dcs[source].energy_price * (brown_energy(src_after, p.power, p.static_mode) - st.brown(source)) +
	                     st.dcs[dest].energy_price * (brown_energy(dst_after, p.power, p.static_mode) - st.brown(dest)) +
	                     st.dcs[source].migration_price * (plan->theta_gbps + 1);
	if (!(delta < -1e-9))
	{
		release(st.grid, path, *range);
		return false;
	}
	st.dcs[source] = std::move(src_after);
	st.dcs[dest] = std::move(dst_after);
	auto& pend = st.pending[source];
	for (VmId id : plan->vms)
	{
		st.vms[id].migrated_to = dest;
		pend.erase(std::find(pend.begin(), pend.end(), id));
	}
	++st.batches_from[source];

	MigrationBatch b;
	b.index = st.log.batches.size() + 1;
	b.source_dc = source;
	b.dest_dc = dest;
	b.vms = plan->vms;
	b.theta_gbps = plan->theta_gbps;
	b.path = path;
	b.modulation_level = plan->modulation_level;
	b.slots = *range;
	st.log.batches.push_back(std::move(b));
	return true;
}

// ---------------------------------------------------------------------------
// Path weights
// ---------------------------------------------------------------------------

/// A(p) / H(p).
inline double weight_ep(const Path& path, const SpectrumGrid& grid, double upsilon_max)
{
	if (path.hops() == 0)
	{
		throw std::invalid_argument("weight_ep: path has no links");
	}
	return double(available_contiguous_bandwidth(grid, path, upsilon_max)) / double(path.hops());
}

/// A(p) / H(p) scaled by the destination's spare cores, sum over servers of (1 - u) * cores.
inline double weight_jre(const Path& path, const Datacenter& dest, const SpectrumGrid& grid, double upsilon_max)
{
	double spare = 0;
	for (const auto& s : dest.servers)
	{
		const double u = double(s.used_cores) / dest.cores_per_server;
		spare += (1 - u) * dest.cores_per_server;
	}
	return weight_ep(path, grid, upsilon_max) * spare;
}

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

/// Shortest path to the sink with the most renewable headroom; stops at the first failure.
inline MigrationLog anycast_sp(CycleState& st)
{
	for (;;)
	{
		const auto sources = st.live_sources();
		const auto sinks = st.live_sinks();
		if (sources.empty() || sinks.empty())
		{
			break;
		}
		std::size_t s = sources.front();
		for (std::size_t c : sources)
		{
			const auto nc = st.pending[c].size();
			const auto ns = st.pending[s].size();
			if (nc > ns || (nc == ns && st.dcs[c].energy_price > st.dcs[s].energy_price))
			{
				s = c;
			}
		}
		std::size_t d = sinks.front();
		for (std::size_t c : sinks)
		{
			if (st.headroom(c) > st.headroom(d))
			{
				d = c;
			}
		}
		const auto& paths = st.candidate_paths(s, d);
		if (paths.empty() || !try_migrate(st, s, d, paths.front()))
		{
			++st.log.blocked_attempts;
			break;
		}
	}
	return st.log;
}

/// Path with the most contiguous free spectrum over all source/sink pairs; stops at the first failure.
inline MigrationLog anycast_mp(CycleState& st)
{
	const double umax = st.params().upsilon_max;
	for (;;)
	{
		const auto sources = st.live_sources();
		const auto sinks = st.live_sinks();
		if (sources.empty() || sinks.empty())
		{
			break;
		}
		const Path* best = nullptr;
		int best_a = -1;
		std::size_t bs = 0, bd = 0;
		for (std::size_t s : sources)
		{
			for (std::size_t d : sinks)
			{
				for (const Path& p : st.candidate_paths(s, d))
				{
					const int a = available_contiguous_bandwidth(st.grid, p, umax);
					// pairs and paths are scanned in lexicographic/rank order, so strict
					// improvement keeps the first of any tie
					if (!best || a > best_a || (a == best_a && p.length_km < best->length_km))
					{
						best = &p;
						best_a = a;
						bs = s;
						bd = d;
					}
				}
			}
		}
		if (!best || !try_migrate(st, bs, bd, *best))
		{
			++st.log.blocked_attempts;
			break;
		}
	}
	return st.log;
}

namespace detail {

template <typename WeightFn>
MigrationLog anycast_ergodic(CycleState& st, WeightFn weight)
{
	for (;;)
	{
		const auto sources = st.live_sources();
		const auto sinks = st.live_sinks();
		if (sources.empty() || sinks.empty())
		{
			break;
		}
		const Path* best = nullptr;
		double best_w = -1;
		std::size_t bs = 0, bd = 0;
		for (std::size_t s : sources)
		{
			for (std::size_t d : sinks)
			{
				for (const Path& p : st.candidate_paths(s, d))
				{
					const double w = weight(p, d);
					if (!best || w > best_w || (w == best_w && p.hops() < best->hops()))
					{
						best = &p;
						best_w = w;
						bs = s;
						bd = d;
					}
				}
			}
		}
		if (best && try_migrate(st, bs, bd, *best))
		{
			continue;
		}
		++st.log.blocked_attempts;
		// exclude the endpoint with the smaller pending energy requirement
		const std::size_t out = st.pending_watts(bs) < st.headroom(bd) ? bs : bd;
		st.excluded[out] = true;
		st.log.excluded.push_back(out);
	}
	return st.log;
}

} // namespace detail

inline MigrationLog anycast_jre(CycleState& st)
{
	const double umax = st.params().upsilon_max;
	return detail::anycast_ergodic(st, [&](const Path& p, std::size_t d) { return weight_jre(p, st.dcs[d], st.grid, umax); });
}

inline MigrationLog anycast_ep(CycleState& st)
{
	const double umax = st.params().upsilon_max;
	return detail::anycast_ergodic(st, [&](const Path& p, std::size_t) { return weight_ep(p, st.grid, umax); });
}

inline MigrationLog run_algorithm(CycleState& st, Algorithm a)
{
	switch (a)
	{
		case Algorithm::none: return st.log;
		case Algorithm::sp: return anycast_sp(st);
		case Algorithm::mp: return anycast_mp(st);
		case Algorithm::ep: return anycast_ep(st);
		case Algorithm::jre: return anycast_jre(st);
	}
	return st.log;
}

// ---------------------------------------------------------------------------
// Cycle orchestration
// ---------------------------------------------------------------------------

struct CycleReport
{
	Algorithm algorithm = Algorithm::none;
	double obj = 0;
	double obj2 = 0;
	double obj2_before = 0;
	double relaxed_obj2 = 0;
	std::size_t migrations = 0;
	std::size_t migrated_vms = 0;
	int blocked = 0;
	std::vector<double> phi_before;
	std::vector<double> phi_after;
	MigrationLog log;
	std::vector<std::vector<int>> server_cores; // final used cores per server per datacenter
	std::vector<std::size_t> vm_dc;             // final datacenter per VM
	std::vector<std::size_t> vm_server;         // final server index per VM

	friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

/// Runs one migration cycle; the result depends only on the scenario and algorithm.
inline CycleReport run_cycle(const Scenario& sc, Algorithm algorithm)
{
	CycleState st(sc);
	const auto& p = sc.params;
	CycleReport r;
	r.algorithm = algorithm;
	r.obj2_before = brown_cost(st.dcs, p.power, p.static_mode);
	r.relaxed_obj2 = st.demand.relaxed_brown_cost;
	for (std::size_t m = 0; m < st.dcs.size(); ++m)
	{
		r.phi_before.push_back(st.brown(m));
	}
	r.log = run_algorithm(st, algorithm);
	const auto charges = r.log.charges();
	r.obj2 = brown_cost(st.dcs, p.power, p.static_mode);
	r.obj = objective(st.dcs, p.power, charges, p.static_mode);
	r.migrations = r.log.batches.size();
	r.migrated_vms = r.log.migrated_vms();
	r.blocked = r.log.blocked_attempts;
	r.vm_dc.assign(sc.vms.size(), 0);
	r.vm_server.assign(sc.vms.size(), 0);
	for (std::size_t m = 0; m < st.dcs.size(); ++m)
	{
		r.phi_after.push_back(st.brown(m));
		std::vector<int> cores;
		for (std::size_t n = 0; n < st.dcs[m].servers.size(); ++n)
		{
			const auto& s = st.dcs[m].servers[n];
			cores.push_back(s.used_cores);
			for (VmId id : s.hosted)
			{
				r.vm_dc[id] = m;
				r.vm_server[id] = n;
			}
		}
		r.server_cores.push_back(std::move(cores));
	}
	return r;
}

} // namespace greenmig

#endif // GREENMIG_HEURISTICS_HPP
