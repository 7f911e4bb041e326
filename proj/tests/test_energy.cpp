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

#include <gtest/gtest.h>

#include <greenmig/energy.hpp>

using namespace greenmig;

namespace {

Datacenter dc(int servers, double xi = 0, double alpha = 10, double beta = 0.1)
{
	return Datacenter(0, 0, servers, 16, alpha, beta, xi);
}

std::vector<VmRequest> cores(std::initializer_list<int> list)
{
	std::vector<VmRequest> out;
	for (int c : list)
	{
		VmRequest v;
		v.id = out.size();
		v.cores = c;
		out.push_back(v);
	}
	return out;
}

} // namespace

TEST(ServerPower, Examples)
{
	PowerParams p;
	EXPECT_DOUBLE_EQ(server_power(p, 0, 16), 140);
	EXPECT_DOUBLE_EQ(server_power(p, 16, 16), 240);
	EXPECT_DOUBLE_EQ(server_power(p, 8, 16), 190);
	EXPECT_THROW(server_power(p, 17, 16), std::out_of_range);
	EXPECT_THROW(server_power(p, -1, 16), std::out_of_range);
}

TEST(ServerPower, AffineSlope)
{
	PowerParams p;
	for (int z = 0; z < 16; ++z)
	{
		EXPECT_NEAR(server_power(p, z + 1, 16) - server_power(p, z, 16), (p.peak - p.idle) / 16, 1e-12);
	}
}

TEST(DcPower, Examples)
{
	PowerParams p;
	EXPECT_DOUBLE_EQ(dc_power(dc(1), p), 140);
	EXPECT_DOUBLE_EQ(dc_power(dc(100), p), 14000);
	Datacenter two = dc(2);
	two.servers[0].used_cores = 16;
	EXPECT_DOUBLE_EQ(dc_power(two, p), 380);
	EXPECT_DOUBLE_EQ(dc_power(two, p, StaticPowerMode::active_servers), 240);
}

TEST(BrownEnergy, Examples)
{
	PowerParams p;
	EXPECT_DOUBLE_EQ(brown_energy(dc(1, 240), p), 0);
	Datacenter full = dc(1, 72);
	full.servers[0].used_cores = 16;
	EXPECT_DOUBLE_EQ(brown_energy(full, p), 168);
	EXPECT_DOUBLE_EQ(brown_energy(dc(1, 140), p), 0);
	EXPECT_DOUBLE_EQ(renewable_headroom(dc(1, 240), p), 100);
	EXPECT_DOUBLE_EQ(renewable_headroom(full, p), 0);
}

TEST(CanHost, Examples)
{
	EXPECT_TRUE(can_host(dc(1), cores({3, 3, 3, 3, 3})));
	EXPECT_FALSE(can_host(dc(1), cores({3, 3, 3, 3, 3, 3})));
	EXPECT_TRUE(can_host(dc(1), {}));
}

TEST(PlaceVms, FirstFitDecreasing)
{
	Datacenter d = dc(2);
	auto vms = cores({5, 5, 5, 5});
	auto where = place_vms(d, vms);
	EXPECT_EQ(where, (std::vector<std::size_t>{0, 0, 0, 1}));
	EXPECT_EQ(d.servers[0].used_cores, 15);
	EXPECT_EQ(d.servers[1].used_cores, 5);

	// larger VMs go first regardless of input order
	Datacenter e = dc(2);
	auto mixed = cores({2, 9, 7, 9});
	place_vms(e, mixed);
	EXPECT_EQ(e.servers[0].used_cores, 9 + 7);
	EXPECT_EQ(e.servers[1].used_cores, 9 + 2);
}

TEST(PlaceVms, RemoveRestoresState)
{
	Datacenter d = dc(3);
	const Datacenter before = d;
	auto vms = cores({3, 1, 2, 16});
	place_vms(d, vms);
	remove_vms(d, vms);
	EXPECT_EQ(d, before);
}

TEST(PlaceVms, FullDatacenterThrows)
{
	Datacenter d = dc(1);
	place_vms(d, cores({16}));
	EXPECT_THROW(place_vms(d, cores({1})), std::logic_error);
	EXPECT_THROW(remove_vms(d, cores({1, 1})), std::logic_error);
}

TEST(Objective, MigrationTerm)
{
	PowerParams p;
	std::vector<Datacenter> dcs{dc(1, 72), dc(1, 240)};
	EXPECT_DOUBLE_EQ(objective(dcs, p, {}), brown_cost(dcs, p));
	std::vector<MigrationCharge> charges{{0, 10, 1}};
	EXPECT_NEAR(objective(dcs, p, charges) - brown_cost(dcs, p), 1.1, 1e-12);
}

TEST(Objective, LinearInPrice)
{
	PowerParams p;
	std::vector<Datacenter> dcs{dc(1, 72, 9), dc(1, 100, 13)};
	const double base = brown_cost(dcs, p);
	for (auto& d : dcs)
	{
		d.energy_price *= 2;
	}
	EXPECT_DOUBLE_EQ(brown_cost(dcs, p), 2 * base);
}

TEST(Datacenter, RejectsBadShape)
{
	EXPECT_THROW(Datacenter(0, 0, 0, 16, 1, 1, 1), std::invalid_argument);
	EXPECT_THROW(Datacenter(0, 0, 1, 16, 1, 1, -1), std::invalid_argument);
	PowerParams bad{200, 100, 1.2};
	EXPECT_THROW(bad.validate(), std::invalid_argument);
}
