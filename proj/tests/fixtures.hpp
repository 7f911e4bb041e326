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

// Hand-built topologies and seeded tiny scenarios shared by the tests.

#ifndef GREENMIG_TESTS_FIXTURES_HPP
#define GREENMIG_TESTS_FIXTURES_HPP

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <greenmig/spectrum.hpp>
#include <greenmig/topology.hpp>
#include <greenmig/workload.hpp>

namespace fixtures {

using namespace greenmig;

inline std::shared_ptr<const Topology> make_topology(std::vector<std::string> names,
                                                     std::vector<Link> links,
                                                     int slot_capacity = 300,
                                                     std::vector<NodeId> dcs = {})
{
	if (dcs.empty())
	{
		for (NodeId i = 0; i < names.size(); ++i)
		{
			dcs.push_back(i);
		}
	}
	return std::make_shared<const Topology>(std::move(names), std::move(links), slot_capacity, std::move(dcs));
}

inline std::shared_ptr<const Topology> two_nodes(int slot_capacity = 300, double km = 1200)
{
	return make_topology({"a", "b"}, {{0, 1, km}}, slot_capacity);
}

inline std::shared_ptr<const Topology> triangle(int slot_capacity = 300, double km = 1000)
{
	return make_topology({"a", "b", "c"}, {{0, 1, km}, {1, 2, km}, {0, 2, km}}, slot_capacity);
}

inline VmRequest vm(std::size_t home, int cores, double gbps)
{
	VmRequest v;
	v.home_dc = home;
	v.cores = cores;
	v.bandwidth_gbps = gbps;
	return v;
}

/// Datacenters of `servers` servers with explicit prices, budgets and requests.
inline Scenario small_scenario(std::shared_ptr<const Topology> topo,
                               std::vector<double> alpha,
                               std::vector<double> xi,
                               std::vector<std::vector<VmRequest>> requests,
                               SimulationParams params = {},
                               int servers = 1)
{
	params.servers_per_dc = servers;
	return make_scenario(std::move(topo), nullptr, params, std::move(alpha), std::move(xi), requests);
}

/**
 * Seeded tiny instance: 2 or 3 one-server datacenters, at most 2 requests
 * each, K <= 2, at most 20 slots per link, one batch per source. Some
 * instances carry background spectrum load or a tighter congestion cap.
 */
inline Scenario tiny_scenario(std::uint64_t seed, bool uncapped = false)
{
	std::mt19937_64 rng(seed * 7919 + 17);
	auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
	auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
	auto km = [&]() { return double(pick(3, 30) * 100); };

	const int n = pick(2, 3);
	const int cap = pick(6, 20);
	std::shared_ptr<const Topology> topo;
	if (n == 2)
	{
		topo = make_topology({"a", "b"}, {{0, 1, km()}}, cap);
	}
	else if (pick(0, 1) == 0)
	{
		topo = make_topology({"a", "b", "c"}, {{0, 1, km()}, {1, 2, km()}, {0, 2, km()}}, cap);
	}
	else
	{
		topo = make_topology({"a", "b", "c"}, {{0, 1, km()}, {1, 2, km()}}, cap);
	}

	SimulationParams p;
	p.servers_per_dc = 1;
	p.h_max = 1;
	p.k_paths = std::size_t(pick(1, 2));
	p.kappa_gbps = pick(0, 1) ? 100 : 30;
	if (pick(0, 1))
	{
		p.modulation = ModulationTable({{1000, 4}, {2000, 2}, {4000, 1}});
	}
	const double caps[] = {1.0, 1.0, 0.75, 0.5};
	p.upsilon_max = caps[pick(0, 3)];
	if (uncapped)
	{
		p.upsilon_max = 1.0;
	}

	std::vector<double> alpha, xi;
	auto requests = std::vector<std::vector<VmRequest>>(std::size_t(n));
	for (int m = 0; m < n; ++m)
	{
		alpha.push_back(real(9, 15));
		xi.push_back(real(72, 240));
		const int count = pick(0, 2);
		for (int i = 0; i < count; ++i)
		{
			requests[std::size_t(m)].push_back(vm(std::size_t(m), pick(1, 3), pick(2, 20)));
		}
	}
	Scenario sc = make_scenario(topo, nullptr, p, alpha, xi, requests);
	if (pick(0, 2) == 0)
	{
		fill_background(sc.grid, real(0.1, 0.6), rng, 3);
	}
	return sc;
}

} // namespace fixtures

#endif
