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

#include <regex>
#include <set>
#include <sstream>

#include <greenmig/exact.hpp>

#include "fixtures.hpp"
#include "oracles/brute_exact.hpp"

using namespace greenmig;
using fixtures::vm;

namespace {

const Algorithm kMigrating[] = {Algorithm::sp, Algorithm::mp, Algorithm::ep, Algorithm::jre};

// rows of the six-node, 2 requests per datacenter model (seed 1), pinned as a regression value
constexpr std::size_t kSixNodeRows = 8580;

Scenario two_dc_one_request()
{
	SimulationParams p;
	p.h_max = 1;
	p.k_paths = 1;
	return fixtures::small_scenario(fixtures::two_nodes(20), {10, 12}, {100, 240}, {{vm(0, 2, 10)}, {}}, p);
}

Scenario six_node_instance(std::uint64_t seed)
{
	auto topo = std::make_shared<const Topology>(load_topology(six_node_description()));
	SimulationParams p;
	p.servers_per_dc = 1;
	p.h_max = 1;
	WorkloadConfig w;
	w.mode = RequestMode::fixed;
	w.requests_per_dc = 2;
	w.seed = seed;
	PriceModel prices;
	prices.uniform_range = std::pair{9.0, 15.0};
	return draw_full_scenario(topo, nullptr, p, w, prices, 0);
}

/// Minimal CPLEX-LP checker: section order, row shape, declared names.
std::vector<std::string> lp_grammar_errors(const std::string& text, const IlpModel& model)
{
	std::vector<std::string> errors;
	std::set<std::string> names;
	for (const auto& v : model.variables())
	{
		names.insert(v.name);
	}
	std::istringstream in(text);
	std::string line;
	std::vector<std::string> sections;
	std::string pending;
	const std::regex row_re(R"(^\s*([A-Za-z_][\w.]*):\s*(.*?)\s*(<=|>=|=)\s*(-?[0-9.eE+-]+)\s*$)");
	const std::regex term_re(R"(^\s*([+-])?\s*([0-9.eE+-]+\s+)?([A-Za-z_][\w.]*)\s*)");
	auto check_row = [&](const std::string& row) {
		std::smatch m;
		if (!std::regex_match(row, m, row_re))
		{
			errors.push_back("malformed row: " + row);
			return;
		}
		std::string terms = m[2];
		std::smatch t;
		while (!terms.empty() && std::regex_search(terms, t, term_re, std::regex_constants::match_continuous))
		{
			if (!names.count(t[3]))
			{
				errors.push_back("undeclared variable " + std::string(t[3]));
			}
			terms = t.suffix();
		}
		if (!terms.empty())
		{
			errors.push_back("trailing text in row: " + row);
		}
	};
	while (std::getline(in, line))
	{
		if (line.rfind("\\", 0) == 0)
		{
			continue;
		}
		if (line == "Minimize" || line == "Subject To" || line == "Bounds" || line == "Generals" || line == "Binaries" || line == "End")
		{
			if (!pending.empty())
			{
				check_row(pending);
				pending.clear();
			}
			sections.push_back(line);
			continue;
		}
		if (sections.empty())
		{
			errors.push_back("text before Minimize");
			continue;
		}
		if (sections.back() == "Subject To")
		{
			if (line.rfind("  ", 0) == 0)
			{
				pending += line;
			}
			else
			{
				if (!pending.empty())
				{
					check_row(pending);
				}
				pending = line;
			}
		}
		else if (sections.back() == "Generals" || sections.back() == "Binaries")
		{
			std::string name = line.substr(line.find_first_not_of(' '));
			if (!names.count(name))
			{
				errors.push_back("undeclared integer " + name);
			}
		}
	}
	if (sections != std::vector<std::string>{"Minimize", "Subject To", "Bounds", "Generals", "Binaries", "End"})
	{
		errors.push_back("unexpected section order");
	}
	return errors;
}

} // namespace

TEST(PackExact, Cases)
{
	EXPECT_TRUE(detail::pack_exact({8, 8, 8, 8}, 2, 16));
	EXPECT_FALSE(detail::pack_exact({9, 9, 9, 9}, 3, 16));
	// first-fit decreasing needs 3 bins here; an exact packing uses 2
	EXPECT_TRUE(detail::pack_exact({7, 6, 5, 5, 4, 3, 2}, 2, 16));
	auto where = detail::pack_exact({7, 6, 5, 5, 4, 3, 2}, 2, 16);
	std::vector<int> load(2, 0);
	const std::vector<int> sizes{7, 6, 5, 5, 4, 3, 2};
	for (std::size_t i = 0; i < sizes.size(); ++i)
	{
		load[(*where)[i]] += sizes[i];
	}
	EXPECT_LE(load[0], 16);
	EXPECT_LE(load[1], 16);
	EXPECT_TRUE(detail::pack_exact({}, 1, 16));
}

TEST(BuildIlp, HandCountTwoDatacenters)
{
	auto sc = two_dc_one_request();
	auto model = build_ilp(sc);
	// one server per datacenter: x and omega each have a single index
	EXPECT_EQ(model.family_count("x"), 1u);
	EXPECT_EQ(model.family_count("z"), 1u);
	EXPECT_EQ(model.family_count("omega"), 1u);
	EXPECT_EQ(model.family_count("y"), 2u);
	EXPECT_EQ(model.family_count("theta"), 2u);
	EXPECT_EQ(model.family_count("b"), 2u);
	EXPECT_EQ(model.family_count("f"), 2u);
	EXPECT_EQ(model.family_count("delta"), 1u);
	EXPECT_EQ(model.family_count("Phi"), 2u);
}

TEST(BuildIlp, EveryConstraintFamilyPresent)
{
	auto model = build_ilp(two_dc_one_request());
	for (int tag = 4; tag <= 22; ++tag)
	{
		EXPECT_GE(model.rows_with_tag(tag), 1u) << "family " << tag;
	}
}

TEST(BuildIlp, RejectsActiveServerReading)
{
	auto sc = two_dc_one_request();
	sc.params.static_mode = StaticPowerMode::active_servers;
	EXPECT_THROW(build_ilp(sc), std::invalid_argument);
}

TEST(BuildIlp, SixNodeRegressionRowCount)
{
	auto model = build_ilp(six_node_instance(1));
	EXPECT_EQ(model.rows().size(), kSixNodeRows);
	for (int tag = 4; tag <= 22; ++tag)
	{
		EXPECT_GE(model.rows_with_tag(tag), 1u) << "family " << tag;
	}
}

TEST(BuildIlp, RowBudget)
{
	IlpOptions tight;
	tight.max_rows = 10;
	EXPECT_THROW(build_ilp(six_node_instance(1), tight), model_too_large);
}

TEST(ExportLp, DeterministicAndWellFormed)
{
	auto sc = two_dc_one_request();
	const auto a = to_lp_string(build_ilp(sc));
	const auto b = to_lp_string(build_ilp(sc));
	EXPECT_EQ(a, b);
	auto model = build_ilp(sc);
	for (const auto& e : lp_grammar_errors(a, model))
	{
		ADD_FAILURE() << e;
	}
	for (int tag = 4; tag <= 22; ++tag)
	{
		EXPECT_NE(a.find("\\ eq" + std::to_string(tag) + "\n"), std::string::npos) << tag;
	}
}

TEST(ExportLp, DegenerateSingleDatacenter)
{
	auto topo = fixtures::make_topology({"a"}, {});
	SimulationParams p;
	p.h_max = 1;
	auto sc = fixtures::small_scenario(topo, {10}, {100}, {{vm(0, 1, 5)}}, p);
	auto model = build_ilp(sc);
	const auto text = to_lp_string(model);
	for (const auto& e : lp_grammar_errors(text, model))
	{
		ADD_FAILURE() << e;
	}
	auto sol = solve_exact(sc);
	ASSERT_TRUE(sol.optimal());
	EXPECT_NEAR(sol.objective, run_cycle(sc, Algorithm::none).obj, 1e-9);
}

bool grid_is_empty(const Scenario& sc)
{
	for (LinkId l = 0; l < sc.grid.link_count(); ++l)
	{
		if (sc.grid.used_slots(l) > 0)
		{
			return false;
		}
	}
	return true;
}

// The model sees background traffic only through each path's occupancy
// ratio, so it describes the grid exactly only when the cycle starts empty.
TEST(IlpAssignment, HeuristicOutcomesSatisfyTheModel)
{
	int checked = 0;
	for (std::uint64_t seed = 0; seed < 180; ++seed)
	{
		auto sc = fixtures::tiny_scenario(seed, true);
		if (!grid_is_empty(sc))
		{
			continue;
		}
		++checked;
		auto model = build_ilp(sc);
		for (Algorithm a : {Algorithm::none, Algorithm::sp, Algorithm::jre})
		{
			auto r = run_cycle(sc, a);
			auto values = ilp_assignment(model, sc, outcome_of(r));
			for (const auto& v : ilp_violations(model, values))
			{
				ADD_FAILURE() << "seed " << seed << " " << to_string(a) << ": " << v;
			}
			EXPECT_NEAR(ilp_objective(model, values), r.obj, 1e-6) << "seed " << seed;
		}
		auto sol = solve_exact(sc);
		ASSERT_TRUE(sol.optimal());
		auto values = ilp_assignment(model, sc, sol.outcome());
		for (const auto& v : ilp_violations(model, values))
		{
			ADD_FAILURE() << "seed " << seed << " exact: " << v;
		}
		EXPECT_NEAR(ilp_objective(model, values), sol.objective, 1e-6);
	}
	EXPECT_GE(checked, 80);
}

TEST(SolveExact, MatchesFullEnumeration)
{
	int migrating = 0;
	for (std::uint64_t seed = 0; seed < 150; ++seed)
	{
		auto sc = fixtures::tiny_scenario(seed, true);
		auto sol = solve_exact(sc);
		ASSERT_TRUE(sol.optimal()) << sol.message;
		const double want = oracle::brute_force_optimum(sc);
		EXPECT_NEAR(sol.objective, want, 1e-6) << "seed " << seed;
		migrating += !sol.batches.empty();
	}
	EXPECT_GT(migrating, 20);
}

TEST(SolveExact, DominatesHeuristicsWithValidOutcomes)
{
	for (std::uint64_t seed = 1000; seed < 1200; ++seed)
	{
		auto sc = fixtures::tiny_scenario(seed);
		auto sol = solve_exact(sc);
		ASSERT_TRUE(sol.optimal());
		for (const auto& v : check_outcome(sc, sol.outcome()))
		{
			ADD_FAILURE() << "seed " << seed << ": " << v.invariant << ": " << v.detail;
		}
		const double none = run_cycle(sc, Algorithm::none).obj;
		EXPECT_LE(sol.objective, none + 1e-9);
		for (Algorithm a : kMigrating)
		{
			EXPECT_LE(sol.objective, run_cycle(sc, a).obj + 1e-9) << "seed " << seed << " " << to_string(a);
		}
	}
}

TEST(SolveExact, NoDeficitMeansNoMigration)
{
	SimulationParams p;
	p.h_max = 1;
	auto sc = fixtures::small_scenario(fixtures::triangle(), {10, 11, 12}, {240, 240, 240}, {{vm(0, 3, 5)}, {vm(1, 2, 8)}, {}}, p);
	auto sol = solve_exact(sc);
	ASSERT_TRUE(sol.optimal());
	EXPECT_TRUE(sol.batches.empty());
	EXPECT_DOUBLE_EQ(sol.objective, run_cycle(sc, Algorithm::none).obj);
}

TEST(SolveExact, ForcedMigrationHandValue)
{
	// a: 140 + 12.5 W on a 100 W budget; moving the VM to b leaves 40 W brown at a
	auto sc = two_dc_one_request();
	auto sol = solve_exact(sc);
	ASSERT_TRUE(sol.optimal());
	EXPECT_NEAR(sol.objective, 10 * 40 + 0.1 * (10 + 1), 1e-9);
	EXPECT_NEAR(sol.objective, oracle::brute_force_optimum(sc), 1e-9);
	ASSERT_EQ(sol.batches.size(), 1u);
	EXPECT_EQ(sol.batches[0].dest_dc, 1u);
}

TEST(SolveExact, SingleCandidateMatchesHeuristic)
{
	auto sc = two_dc_one_request();
	auto sol = solve_exact(sc);
	for (Algorithm a : kMigrating)
	{
		EXPECT_NEAR(sol.objective, run_cycle(sc, a).obj, 1e-9);
	}
}

TEST(SolveExact, ReportsLimits)
{
	auto sc = six_node_instance(3);
	ExactLimits few;
	few.max_requests = 4;
	auto sol = solve_exact(sc, few);
	EXPECT_FALSE(sol.optimal());
	EXPECT_FALSE(sol.message.empty());
	ExactLimits shallow;
	shallow.max_nodes = 10;
	auto cut = solve_exact(sc, shallow);
	EXPECT_FALSE(cut.optimal());
	EXPECT_NE(cut.message.find("node limit"), std::string::npos);
}

TEST(SolveExact, SixNodeScale)
{
	for (std::uint64_t seed = 1; seed <= 5; ++seed)
	{
		auto sc = six_node_instance(seed);
		auto sol = solve_exact(sc);
		ASSERT_TRUE(sol.optimal()) << sol.message;
		EXPECT_TRUE(check_outcome(sc, sol.outcome()).empty());
		for (Algorithm a : kMigrating)
		{
			EXPECT_LE(sol.objective, run_cycle(sc, a).obj + 1e-9);
		}
	}
}
