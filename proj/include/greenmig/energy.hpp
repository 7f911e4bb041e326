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
 * \file greenmig/energy.hpp
 *
 * \brief Server and datacenter power, brown energy and cost accounting.
 *
 * A server draws a static part P^s = P^i + (pue - 1) * P^p whenever it is
 * counted, plus (P^p - P^i) * used / cores of dynamic power. Power values are
 * watts over one migration cycle; prices are cents per watt-cycle.
 */

#ifndef GREENMIG_ENERGY_HPP
#define GREENMIG_ENERGY_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <greenmig/topology.hpp>

namespace greenmig {

using VmId = std::size_t;

struct PowerParams
{
	double idle = 100;  // W
	double peak = 200;  // W
	double pue = 1.2;

	double static_power() const { return idle + (pue - 1) * peak; }
	double dynamic_per_core(int cores_per_server) const { return (peak - idle) / cores_per_server; }

	void validate() const
	{
		if (!(idle > 0) || !(peak > idle) || !(pue >= 1))
		{
			throw std::invalid_argument("power parameters require peak > idle > 0 and pue >= 1");
		}
	}
};

/// Which servers pay static power: all of them (idle servers stay on) or only those hosting VMs.
enum class StaticPowerMode
{
	all_servers,
	active_servers
};

struct VmRequest
{
	VmId id = 0;
	std::size_t home_dc = 0;
	int cores = 1;
	double bandwidth_gbps = 1;
	std::optional<std::size_t> migrated_to;

	friend bool operator==(const VmRequest&, const VmRequest&) = default;
};

struct ServerState
{
	int used_cores = 0;
	std::vector<VmId> hosted;

	friend bool operator==(const ServerState&, const ServerState&) = default;
};

struct Datacenter
{
	std::size_t id = 0;
	NodeId node = 0;
	std::vector<ServerState> servers;
	int cores_per_server = 16;
	double energy_price = 0;     // alpha, cents per watt-cycle
	double migration_price = 0;  // beta, cents per unit
	double renewable_budget = 0; // xi, watts this cycle

	Datacenter() = default;

	Datacenter(std::size_t id_, NodeId node_, int servers_, int cores_per_server_, double alpha, double beta, double xi)
	: id(id_),
	  node(node_),
	  servers(std::size_t(servers_)),
	  cores_per_server(cores_per_server_),
	  energy_price(alpha),
	  migration_price(beta),
	  renewable_budget(xi)
	{
		if (servers_ < 1 || cores_per_server_ < 1)
		{
			throw std::invalid_argument("datacenter needs at least one server and one core per server");
		}
		if (xi < 0)
		{
			throw std::invalid_argument("renewable budget must be non-negative");
		}
	}

	int used_cores() const
	{
		int total = 0;
		for (const auto& s : servers)
		{
			total += s.used_cores;
		}
		return total;
	}

	int free_cores() const { return int(servers.size()) * cores_per_server - used_cores(); }

	int active_servers() const
	{
		return int(std::count_if(servers.begin(), servers.end(), [](const ServerState& s) { return s.used_cores > 0; }));
	}

	friend bool operator==(const Datacenter&, const Datacenter&) = default;
};

inline double server_power(const PowerParams& params, int used_cores, int cores_per_server)
{
	if (used_cores < 0 || used_cores > cores_per_server)
	{
		throw std::out_of_range("server_power: used cores outside [0, cores_per_server]");
	}
	return params.static_power() + (params.peak - params.idle) * (double(used_cores) / cores_per_server);
}

inline double dc_power(const Datacenter& dc, const PowerParams& params, StaticPowerMode mode = StaticPowerMode::all_servers)
{
	double total = 0;
	for (const auto& s : dc.servers)
	{
		if (mode == StaticPowerMode::active_servers && s.used_cores == 0)
		{
			continue;
		}
		total += server_power(params, s.used_cores, dc.cores_per_server);
	}
	return total;
}

/// Phi: grid power drawn beyond the renewable budget, never negative.
inline double brown_energy(const Datacenter& dc, const PowerParams& params, StaticPowerMode mode = StaticPowerMode::all_servers)
{
	return std::max(dc_power(dc, params, mode) - dc.renewable_budget, 0.0);
}

/// Renewable watts left unused; zero for brown datacenters.
inline double renewable_headroom(const Datacenter& dc, const PowerParams& params, StaticPowerMode mode = StaticPowerMode::all_servers)
{
	return std::max(dc.renewable_budget - dc_power(dc, params, mode), 0.0);
}

namespace detail {

/// FFD order: cores descending, then id ascending.
inline std::vector<const VmRequest*> ffd_order(std::span<const VmRequest> vms)
{
	std::vector<const VmRequest*> order;
	order.reserve(vms.size());
	for (const auto& v : vms)
	{
		order.push_back(&v);
	}
	std::sort(order.begin(), order.end(), [](const VmRequest* a, const VmRequest* b) {
		if (a->cores != b->cores)
		{
			return a->cores > b->cores;
		}
		return a->id < b->id;
	});
	return order;
}

} // namespace detail

/// Server index per VM (in input order) under first-fit decreasing, or nullopt if they do not fit.
inline std::optional<std::vector<std::size_t>> ffd_placement(const Datacenter& dc, std::span<const VmRequest> vms)
{
	std::vector<int> used;
	used.reserve(dc.servers.size());
	for (const auto& s : dc.servers)
	{
		used.push_back(s.used_cores);
	}
	std::vector<std::size_t> where(vms.size());
	for (const VmRequest* v : detail::ffd_order(vms))
	{
		bool placed = false;
		for (std::size_t n = 0; n < used.size(); ++n)
		{
			if (used[n] + v->cores <= dc.cores_per_server)
			{
				used[n] += v->cores;
				where[std::size_t(v - vms.data())] = n;
				placed = true;
				break;
			}
		}
		if (!placed)
		{
			return std::nullopt;
		}
	}
	return where;
}

inline bool can_host(const Datacenter& dc, std::span<const VmRequest> vms)
{
	return ffd_placement(dc, vms).has_value();
}

/// Places VMs by first-fit decreasing; returns the server index of each VM in input order.
inline std::vector<std::size_t> place_vms(Datacenter& dc, std::span<const VmRequest> vms)
{
	auto where = ffd_placement(dc, vms);
	if (!where)
	{
		throw std::logic_error("place_vms: datacenter " + std::to_string(dc.id) + " cannot host the VMs");
	}
	for (const VmRequest* v : detail::ffd_order(vms))
	{
		auto& server = dc.servers[(*where)[std::size_t(v - vms.data())]];
		server.used_cores += v->cores;
		server.hosted.push_back(v->id);
	}
	return *where;
}

inline void remove_vms(Datacenter& dc, std::span<const VmRequest> vms)
{
	for (const auto& v : vms)
	{
		bool found = false;
		for (auto& s : dc.servers)
		{
			auto it = std::find(s.hosted.begin(), s.hosted.end(), v.id);
			if (it != s.hosted.end())
			{
				s.hosted.erase(it);
				s.used_cores -= v.cores;
				found = true;
				break;
			}
		}
		if (!found)
		{
			throw std::logic_error("remove_vms: VM " + std::to_string(v.id) + " is not hosted in datacenter " + std::to_string(dc.id));
		}
	}
}

/// obj2: total cost of brown energy.
inline double brown_cost(std::span<const Datacenter> dcs, const PowerParams& params, StaticPowerMode mode = StaticPowerMode::all_servers)
{
	double total = 0;
	for (const auto& dc : dcs)
	{
		total += dc.energy_price * brown_energy(dc, params, mode);
	}
	return total;
}

/// Migration charged to a source datacenter: migrated bandwidth plus one unit per lightpath.
struct MigrationCharge
{
	std::size_t source_dc = 0;
	double migrated_gbps = 0;
	int lightpaths = 0;
};

inline double migration_cost(std::span<const Datacenter> dcs, std::span<const MigrationCharge> charges)
{
	double total = 0;
	for (const auto& c : charges)
	{
		total += dcs[c.source_dc].migration_price * (c.migrated_gbps + c.lightpaths);
	}
	return total;
}

/// obj: brown cost plus migration cost.
inline double objective(std::span<const Datacenter> dcs,
                        const PowerParams& params,
                        std::span<const MigrationCharge> charges,
                        StaticPowerMode mode = StaticPowerMode::all_servers)
{
	return brown_cost(dcs, params, mode) + migration_cost(dcs, charges);
}

} // namespace greenmig

#endif // GREENMIG_ENERGY_HPP
