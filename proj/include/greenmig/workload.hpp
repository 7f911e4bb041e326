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
 * \file greenmig/workload.hpp
 *
 * \brief Scenario randomization and the network-relaxed workload
 *  redistribution that defines which datacenters send and receive VMs.
 *
 * Every random quantity comes from its own stream keyed by
 * (seed, replication, stream tag, datacenter), so growing the request load
 * keeps the renewable budgets and the first VMs of every datacenter intact.
 */

#ifndef GREENMIG_WORKLOAD_HPP
#define GREENMIG_WORKLOAD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <greenmig/energy.hpp>
#include <greenmig/spectrum.hpp>
#include <greenmig/topology.hpp>

namespace greenmig {

enum class RequestMode
{
	poisson,
	fixed
};

struct WorkloadConfig
{
	double requests_per_dc = 400;  // Poisson mean, or exact count in fixed mode
	RequestMode mode = RequestMode::poisson;
	std::pair<int, int> psi_range{1, 3};            // cores
	std::pair<int, int> sigma_range_gbps{2, 20};    // migration bandwidth
	std::pair<double, double> xi_fraction_range{0.3, 1.0}; // of peak * servers * pue
	std::uint64_t seed = 1;

	void validate() const
	{
		if (!(requests_per_dc >= 0))
		{
			throw std::invalid_argument("requests_per_dc must be non-negative");
		}
		if (psi_range.first < 1 || psi_range.second < psi_range.first)
		{
			throw std::invalid_argument("psi_range must satisfy 1 <= lo <= hi");
		}
		if (sigma_range_gbps.first < 1 || sigma_range_gbps.second < sigma_range_gbps.first)
		{
			throw std::invalid_argument("sigma_range_gbps must satisfy 1 <= lo <= hi");
		}
		if (xi_fraction_range.first < 0 || xi_fraction_range.second < xi_fraction_range.first)
		{
			throw std::invalid_argument("xi_fraction_range must satisfy 0 <= lo <= hi");
		}
	}
};

enum class StreamTag : std::uint64_t
{
	request_count = 1,
	request_attributes = 2,
	renewable = 3,
	price = 4,
	background = 5
};

inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t replication, StreamTag tag, std::uint64_t index = 0)
{
	std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(replication), std::uint32_t(replication >> 32),
	                  std::uint32_t(tag), std::uint32_t(index)};
	return std::mt19937_64(seq);
}

/// Per-datacenter request counts for one replication.
inline std::vector<int> draw_request_counts(const WorkloadConfig& cfg, std::size_t dc_count, std::uint64_t replication)
{
	std::vector<int> counts(dc_count);
	for (std::size_t m = 0; m < dc_count; ++m)
	{
		if (cfg.mode == RequestMode::fixed)
		{
			counts[m] = int(cfg.requests_per_dc);
		}
		else
		{
			auto rng = stream_engine(cfg.seed, replication, StreamTag::request_count, m);
			counts[m] = cfg.requests_per_dc > 0 ? int(std::poisson_distribution<int>(cfg.requests_per_dc)(rng)) : 0;
		}
	}
	return counts;
}

struct ScenarioDraw
{
	std::vector<std::vector<VmRequest>> requests; // per home datacenter; ids unique across the draw
	std::vector<double> renewable;
	std::uint64_t rng_seed = 0;
	std::uint64_t replication = 0;

	std::size_t total_requests() const
	{
		std::size_t n = 0;
		for (const auto& r : requests)
		{
			n += r.size();
		}
		return n;
	}
};

/// VMs for every datacenter; ids are assigned datacenter-major.
inline std::vector<std::vector<VmRequest>> generate_requests(const WorkloadConfig& cfg, std::size_t dc_count, std::uint64_t replication)
{
	cfg.validate();
	const auto counts = draw_request_counts(cfg, dc_count, replication);
	std::vector<std::vector<VmRequest>> out(dc_count);
	VmId next = 0;
	for (std::size_t m = 0; m < dc_count; ++m)
	{
		auto rng = stream_engine(cfg.seed, replication, StreamTag::request_attributes, m);
		std::uniform_int_distribution<int> psi(cfg.psi_range.first, cfg.psi_range.second);
		std::uniform_int_distribution<int> sigma(cfg.sigma_range_gbps.first, cfg.sigma_range_gbps.second);
		for (int i = 0; i < counts[m]; ++i)
		{
			VmRequest v;
			v.id = next++;
			v.home_dc = m;
			v.cores = psi(rng);
			v.bandwidth_gbps = sigma(rng);
			out[m].push_back(v);
		}
	}
	return out;
}

struct RenewableParams
{
	std::size_t dc_count = 0;
	int servers_per_dc = 100;
	PowerParams power;
	std::pair<double, double> fraction_range{0.3, 1.0};
};

/// xi per datacenter, uniform in [lo, hi] * peak * servers * pue.
inline std::vector<double> draw_renewable(std::mt19937_64& rng, const RenewableParams& p)
{
	const double scale = p.power.peak * p.servers_per_dc * p.power.pue;
	std::uniform_real_distribution<double> dist(p.fraction_range.first * scale, p.fraction_range.second * scale);
	std::vector<double> xi(p.dc_count);
	for (auto& x : xi)
	{
		x = p.fraction_range.first == p.fraction_range.second ? p.fraction_range.first * scale : dist(rng);
	}
	return xi;
}

inline ScenarioDraw draw_scenario(const WorkloadConfig& cfg, const RenewableParams& rp, std::uint64_t replication)
{
	ScenarioDraw d;
	d.rng_seed = cfg.seed;
	d.replication = replication;
	auto rng = stream_engine(cfg.seed, replication, StreamTag::renewable);
	d.renewable = draw_renewable(rng, rp);
	d.requests = generate_requests(cfg, rp.dc_count, replication);
	return d;
}

// ---------------------------------------------------------------------------
// Simulation parameters and scenarios
// ---------------------------------------------------------------------------

struct SimulationParams
{
	PowerParams power;
	StaticPowerMode static_mode = StaticPowerMode::all_servers;
	int cores_per_server = 16;
	int servers_per_dc = 100;
	double slot_rate_gbps = 12.5;
	double kappa_gbps = 100;
	int guard_slots = 1;
	std::size_t k_paths = 3;
	double upsilon_max = 1.0;
	int h_max = 0; // 0: unlimited
	double beta_cents = 0.1;
	bool guard_counts_toward_congestion = true;
	ModulationTable modulation;

	double dynamic_per_core() const { return power.dynamic_per_core(cores_per_server); }

	void validate() const
	{
		power.validate();
		if (cores_per_server < 1 || servers_per_dc < 1)
		{
			throw std::invalid_argument("cores_per_server and servers_per_dc must be >= 1");
		}
		if (!(slot_rate_gbps > 0) || !(kappa_gbps > 0))
		{
			throw std::invalid_argument("slot rate and kappa must be positive");
		}
		if (guard_slots < 0 || h_max < 0 || k_paths < 1)
		{
			throw std::invalid_argument("guard_slots and h_max must be >= 0, k_paths >= 1");
		}
		if (!(upsilon_max > 0) || upsilon_max > 1)
		{
			throw std::invalid_argument("upsilon_max must be in (0, 1]");
		}
		if (beta_cents < 0)
		{
			throw std::invalid_argument("beta must be non-negative");
		}
	}
};

/// Electricity prices per datacenter: a fixed table (cycled) or uniform draws.
struct PriceModel
{
	std::vector<double> table{9.09, 11.28, 12.57, 10.88, 12.12, 11.56, 10.60, 12.50, 13.64, 11.54, 14.42, 18.54, 15.81, 12.99};
	std::optional<std::pair<double, double>> uniform_range;

	std::vector<double> draw(std::size_t dc_count, std::uint64_t seed, std::uint64_t replication) const
	{
		std::vector<double> alpha(dc_count);
		if (uniform_range)
		{
			auto rng = stream_engine(seed, replication, StreamTag::price);
			std::uniform_real_distribution<double> dist(uniform_range->first, uniform_range->second);
			for (auto& a : alpha)
			{
				a = dist(rng);
			}
		}
		else
		{
			if (table.empty())
			{
				throw std::invalid_argument("price table is empty");
			}
			for (std::size_t m = 0; m < dc_count; ++m)
			{
				alpha[m] = table[m % table.size()];
			}
		}
		return alpha;
	}
};

/**
 * One fully drawn migration-cycle instance. Datacenter m sits on topology
 * node topology->dc_nodes()[m]; vms[i].id == i.
 */
struct Scenario
{
	std::shared_ptr<const Topology> topology;
	std::shared_ptr<const PathTable> paths;
	SimulationParams params;
	std::vector<double> alpha;
	std::vector<double> beta;
	std::vector<double> renewable;
	std::vector<VmRequest> vms;
	std::size_t rejected_requests = 0; // did not fit at home
	SpectrumGrid grid;
	std::uint64_t seed = 0;
	std::uint64_t replication = 0;

	std::size_t dc_count() const { return renewable.size(); }

	/// Datacenters with every VM at its home, placed first-fit decreasing.
	std::vector<Datacenter> initial_datacenters() const
	{
		std::vector<Datacenter> dcs;
		for (std::size_t m = 0; m < dc_count(); ++m)
		{
			dcs.emplace_back(m, topology->dc_nodes()[m], params.servers_per_dc, params.cores_per_server, alpha[m], beta[m], renewable[m]);
		}
		std::vector<std::vector<VmRequest>> home(dc_count());
		for (const auto& v : vms)
		{
			home[v.home_dc].push_back(v);
		}
		for (std::size_t m = 0; m < dc_count(); ++m)
		{
			place_vms(dcs[m], home[m]);
		}
		return dcs;
	}
};

/**
 * Builds a scenario from explicit data. VMs that do not fit their home
 * datacenter (first-fit decreasing) are dropped and counted as rejected;
 * survivors are renumbered densely.
 */
inline Scenario make_scenario(std::shared_ptr<const Topology> topology,
                              std::shared_ptr<const PathTable> paths,
                              const SimulationParams& params,
                              std::vector<double> alpha,
                              std::vector<double> renewable,
                              const std::vector<std::vector<VmRequest>>& requests)
{
	params.validate();
	const std::size_t n = topology->dc_nodes().size();
	if (alpha.size() != n || renewable.size() != n || requests.size() != n)
	{
		throw std::invalid_argument("make_scenario: per-datacenter vectors must match the datacenter count");
	}
	if (!paths)
	{
		paths = std::make_shared<const PathTable>(*topology, params.k_paths);
	}
	Scenario sc;
	sc.topology = std::move(topology);
	sc.paths = std::move(paths);
	sc.params = params;
	sc.alpha = std::move(alpha);
	sc.beta.assign(n, params.beta_cents);
	sc.renewable = std::move(renewable);
	sc.grid = SpectrumGrid(*sc.topology, params.slot_rate_gbps);
	sc.grid.set_guard_counts_toward_congestion(params.guard_counts_toward_congestion);

	for (std::size_t m = 0; m < n; ++m)
	{
		Datacenter probe(m, 0, params.servers_per_dc, params.cores_per_server, 0, 0, 0);
		const auto order = detail::ffd_order(requests[m]);
		std::vector<bool> admitted(requests[m].size(), false);
		for (const VmRequest* v : order)
		{
			if (can_host(probe, std::span<const VmRequest>(v, 1)))
			{
				place_vms(probe, std::span<const VmRequest>(v, 1));
				admitted[std::size_t(v - requests[m].data())] = true;
			}
			else
			{
				++sc.rejected_requests;
			}
		}
		for (std::size_t i = 0; i < requests[m].size(); ++i)
		{
			if (admitted[i])
			{
				VmRequest v = requests[m][i];
				v.id = sc.vms.size();
				v.home_dc = m;
				v.migrated_to.reset();
				sc.vms.push_back(v);
			}
		}
	}
	return sc;
}

inline Scenario draw_full_scenario(std::shared_ptr<const Topology> topology,
                                   std::shared_ptr<const PathTable> paths,
                                   const SimulationParams& params,
                                   const WorkloadConfig& workload,
                                   const PriceModel& prices,
                                   std::uint64_t replication,
                                   double background_fill = 0)
{
	const std::size_t n = topology->dc_nodes().size();
	RenewableParams rp{n, params.servers_per_dc, params.power, workload.xi_fraction_range};
	auto draw = draw_scenario(workload, rp, replication);
	auto alpha = prices.draw(n, workload.seed, replication);
	Scenario sc = make_scenario(std::move(topology), std::move(paths), params, std::move(alpha), std::move(draw.renewable), draw.requests);
	sc.seed = workload.seed;
	sc.replication = replication;
	if (background_fill > 0)
	{
		auto rng = stream_engine(workload.seed, replication, StreamTag::background);
		fill_background(sc.grid, background_fill, rng);
	}
	return sc;
}

// ---------------------------------------------------------------------------
// Network-relaxed redistribution
// ---------------------------------------------------------------------------

struct MigrationDemand
{
	std::vector<std::size_t> sources;          // D_s, ascending
	std::vector<std::size_t> sinks;            // D_d, ascending
	std::vector<std::vector<VmId>> out_vms;    // per datacenter, designated out-VMs sorted by (bandwidth, id)
	std::vector<double> sink_headroom_w;       // per datacenter (zero for non-sinks)
	std::vector<int> sink_free_cores;          // per datacenter (zero for non-sinks)
	std::vector<std::pair<VmId, std::size_t>> moves; // relaxed (vm, target) in designation order
	double relaxed_brown_cost = 0;             // obj2 implied by the relaxed moves

	bool empty() const { return sources.empty(); }
};

namespace detail {

inline double power_after(const Datacenter& dc, const SimulationParams& p)
{
	return dc_power(dc, p.power, p.static_mode);
}

} // namespace detail

/**
 * Greedy marginal-cost redistribution ignoring the network.
 *
 * Each step moves the single VM whose removal from a brown datacenter saves
 * the most alpha-weighted brown power net of its beta bandwidth charge, to
 * the datacenter with the most renewable headroom that can absorb the VM's
 * power entirely and has room for its cores. Receivers therefore never turn
 * brown, which keeps the implied cost a lower bound for any subset of the
 * moves. Stops when no move has positive gain.
 */
inline MigrationDemand suboptimal_allocation(const std::vector<Datacenter>& dcs_in,
                                             const std::vector<VmRequest>& vms,
                                             const SimulationParams& params)
{
	std::vector<Datacenter> dcs = dcs_in;
	const std::size_t n = dcs.size();
	const auto& pw = params.power;
	const auto mode = params.static_mode;

	std::vector<bool> is_source(n, false), is_sink(n, false);
	for (std::size_t m = 0; m < n; ++m)
	{
		if (brown_energy(dcs[m], pw, mode) > 0)
		{
			is_source[m] = true;
		}
		else if (renewable_headroom(dcs[m], pw, mode) > 0 && dcs[m].free_cores() > 0)
		{
			is_sink[m] = true;
		}
	}

	MigrationDemand demand;
	demand.out_vms.resize(n);
	std::vector<bool> designated(vms.size(), false);

	for (;;)
	{
		struct Best
		{
			double gain = 0;
			VmId vm = 0;
			std::size_t src = 0;
			std::size_t dst = 0;
			bool found = false;
		} best;

		for (std::size_t s = 0; s < n; ++s)
		{
			if (!is_source[s])
			{
				continue;
			}
			const double phi = brown_energy(dcs[s], pw, mode);
			if (phi <= 0)
			{
				continue;
			}
			// Within one datacenter the gain depends on the VM only through its
			// cores (and, in active mode, its server); keep the cheapest VM per core count.
			std::map<int, const VmRequest*> per_cores;
			for (const auto& server : dcs[s].servers)
			{
				for (VmId id : server.hosted)
				{
					const auto& v = vms[id];
					if (designated[id] || v.home_dc != s)
					{
						continue;
					}
					auto& slot = per_cores[v.cores];
					if (!slot || v.bandwidth_gbps < slot->bandwidth_gbps || (v.bandwidth_gbps == slot->bandwidth_gbps && v.id < slot->id))
					{
						slot = &v;
					}
				}
			}
			for (const auto& [cores, vp] : per_cores)
			{
				const VmRequest& v = *vp;
				Datacenter src_after = dcs[s];
				remove_vms(src_after, std::span<const VmRequest>(&v, 1));
				const double saved = dcs[s].energy_price * (phi - brown_energy(src_after, pw, mode));
				const double gain = saved - dcs[s].migration_price * v.bandwidth_gbps;
				if (!(gain > 1e-9))
				{
					continue;
				}
				const bool better = !best.found || gain > best.gain + 1e-12 ||
				                    (std::abs(gain - best.gain) <= 1e-12 &&
				                     (v.bandwidth_gbps < vms[best.vm].bandwidth_gbps ||
				                      (v.bandwidth_gbps == vms[best.vm].bandwidth_gbps && v.id < best.vm)));
				if (!better)
				{
					continue;
				}
				std::optional<std::size_t> target;
				double target_headroom = -1;
				for (std::size_t d = 0; d < n; ++d)
				{
					if (!is_sink[d])
					{
						continue;
					}
					const double headroom = renewable_headroom(dcs[d], pw, mode);
					if (headroom <= target_headroom || !can_host(dcs[d], std::span<const VmRequest>(&v, 1)))
					{
						continue;
					}
					Datacenter dst_after = dcs[d];
					place_vms(dst_after, std::span<const VmRequest>(&v, 1));
					if (detail::power_after(dst_after, params) > dst_after.renewable_budget + 1e-9)
					{
						continue;
					}
					target = d;
					target_headroom = headroom;
				}
				if (target)
				{
					best = Best{gain, v.id, s, *target, true};
				}
			}
		}
		if (!best.found)
		{
			break;
		}
		const VmRequest& v = vms[best.vm];
		remove_vms(dcs[best.src], std::span<const VmRequest>(&v, 1));
		place_vms(dcs[best.dst], std::span<const VmRequest>(&v, 1));
		designated[best.vm] = true;
		demand.out_vms[best.src].push_back(best.vm);
		demand.moves.emplace_back(best.vm, best.dst);
	}

	for (std::size_t m = 0; m < n; ++m)
	{
		auto& out = demand.out_vms[m];
		std::sort(out.begin(), out.end(), [&](VmId a, VmId b) {
			if (vms[a].bandwidth_gbps != vms[b].bandwidth_gbps)
			{
				return vms[a].bandwidth_gbps < vms[b].bandwidth_gbps;
			}
			return a < b;
		});
		if (!out.empty())
		{
			demand.sources.push_back(m);
		}
	}
	demand.sink_headroom_w.assign(n, 0);
	demand.sink_free_cores.assign(n, 0);
	for (std::size_t m = 0; m < n; ++m)
	{
		if (is_sink[m])
		{
			demand.sinks.push_back(m);
			demand.sink_headroom_w[m] = renewable_headroom(dcs_in[m], pw, mode);
			demand.sink_free_cores[m] = dcs_in[m].free_cores();
		}
	}
	demand.relaxed_brown_cost = brown_cost(dcs, pw, mode);
	return demand;
}

} // namespace greenmig

#endif // GREENMIG_WORKLOAD_HPP
