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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <greenmig.hpp>

#include "fixtures.hpp"
#include "oracles/slot_scan.hpp"

using namespace greenmig;

namespace {

struct Verdict
{
	bool pass = true;
	std::string detail;
};

const Algorithm kHeuristics[] = {Algorithm::sp, Algorithm::mp, Algorithm::ep, Algorithm::jre};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
	char buf[256];
	std::snprintf(buf, sizeof buf, f, a, b, c, d);
	return buf;
}

// 1. exact <= every heuristic <= no migration on tiny instances, every outcome valid
Verdict oracle_dominance()
{
	Verdict v;
	const int instances = 60;
	int checked = 0, violations = 0, migrating = 0;
	for (int seed = 0; seed < instances; ++seed)
	{
		auto sc = fixtures::tiny_scenario(std::uint64_t(5000 + seed));
		auto sol = solve_exact(sc);
		if (!sol.optimal())
		{
			v.pass = false;
			v.detail = "seed " + std::to_string(5000 + seed) + ": exact solver " + sol.message;
			return v;
		}
		violations += int(check_outcome(sc, sol.outcome()).size());
		const double none = run_cycle(sc, Algorithm::none).obj;
		for (Algorithm a : kHeuristics)
		{
			auto r = run_cycle(sc, a);
			violations += int(check_outcome(sc, outcome_of(r)).size());
			if (!(sol.objective <= r.obj + 1e-9) || !(r.obj <= none + 1e-9))
			{
				v.pass = false;
				v.detail = "seed " + std::to_string(5000 + seed) + " " + std::string(to_string(a)) + fmt(": exact %.4f heuristic %.4f none %.4f", sol.objective, r.obj, none);
				return v;
			}
			++checked;
		}
		migrating += !sol.batches.empty();
	}
	v.pass = violations == 0;
	v.detail = std::to_string(instances) + " instances, " + std::to_string(checked) + " heuristic runs, " + std::to_string(migrating) +
	           " with optimal migration, " + std::to_string(violations) + " violations";
	return v;
}

ExperimentSpec six_node_spec()
{
	return parse_spec(nlohmann::json::parse(R"({
		"topology": "six-node", "servers_per_dc": 1, "mode": "fixed", "loads": [2], "h_max": 1,
		"alpha_range": [9, 15], "umax": [1.0], "replications": 20, "oracle": true})"));
}

// 2. mean objective ordering on six-node, 2 requests per datacenter
Verdict six_node_ordering(const ExperimentResult& run)
{
	std::map<std::string, double> mean;
	for (const auto& s : summarize(run.rows))
	{
		mean[s.algorithm] = s.obj_mean;
	}
	struct Step
	{
		const char* lo;
		const char* hi;
		double slack;
	};
	const Step chain[] = {{"oracle", "jre", 0}, {"jre", "ep", 0.02}, {"ep", "mp", 0}, {"mp", "sp", 0.04}, {"sp", "none", 0}};
	Verdict v;
	v.detail = fmt("oracle %.1f  jre %.1f  ep %.1f  mp %.1f", mean["oracle"], mean["jre"], mean["ep"], mean["mp"]) + fmt("  sp %.1f  none %.1f", mean["sp"], mean["none"]);
	for (const auto& s : chain)
	{
		if (!(mean[s.lo] <= mean[s.hi] * (1 + s.slack) + 1e-9))
		{
			v.pass = false;
			v.detail += std::string("; ") + s.lo + " > " + s.hi + fmt(" by %.1f%%", 100 * (mean[s.lo] / mean[s.hi] - 1));
		}
	}
	return v;
}

ExperimentSpec desk_spec()
{
	return parse_spec(nlohmann::json::parse(R"({
		"profile": "desk", "topology": "nsfnet",
		"umax": [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0]})"));
}

const SummaryRow* cell(const std::vector<SummaryRow>& s, const std::string& alg, double umax, double load)
{
	for (const auto& r : s)
	{
		if (r.algorithm == alg && r.umax == umax && r.load == load)
		{
			return &r;
		}
	}
	return nullptr;
}

// 3. JRE brown-cost saving at the lowest load
Verdict savings(const ExperimentSpec& spec, const std::vector<SummaryRow>& s)
{
	Verdict v;
	const double low = spec.loads.front();
	struct Bracket
	{
		double umax, lo, hi;
	};
	for (const auto& b : {Bracket{1.0, 0.10, 0.30}, Bracket{0.5, 0.08, 0.25}})
	{
		const auto* none = cell(s, "none", b.umax, low);
		const auto* jre = cell(s, "jre", b.umax, low);
		if (!none || !jre)
		{
			return {false, "missing cell"};
		}
		const double saving = 1 - jre->obj2_mean / none->obj2_mean;
		v.pass = v.pass && saving >= b.lo && saving <= b.hi;
		v.detail += fmt("umax %.2g: %.1f%% in [%.0f%%, %.0f%%]; ", b.umax, 100 * saving, 100 * b.lo, 100 * b.hi);
	}
	return v;
}

int inversions(const std::vector<double>& ys, bool increasing)
{
	int n = 0;
	for (std::size_t i = 1; i < ys.size(); ++i)
	{
		n += increasing ? ys[i] < ys[i - 1] - 1e-9 : ys[i] > ys[i - 1] + 1e-9;
	}
	return n;
}

// 4. brown cost non-decreasing in load, non-increasing in umax
Verdict monotonicity(const ExperimentSpec& spec, const std::vector<SummaryRow>& s)
{
	Verdict v;
	int curves = 0, worst = 0;
	for (Algorithm a : spec.algorithms)
	{
		const std::string alg(to_string(a));
		for (double u : spec.umax)
		{
			std::vector<double> ys;
			for (double l : spec.loads)
			{
				ys.push_back(cell(s, alg, u, l)->obj2_mean);
			}
			const int inv = inversions(ys, true);
			worst = std::max(worst, inv);
			++curves;
			if (inv > 1)
			{
				v.pass = false;
				v.detail += alg + fmt(" vs load at umax %.3g: %.0f inversions; ", u, inv);
			}
		}
		for (double l : spec.loads)
		{
			std::vector<double> ys;
			for (double u : spec.umax)
			{
				ys.push_back(cell(s, alg, u, l)->obj2_mean);
			}
			const int inv = inversions(ys, false);
			worst = std::max(worst, inv);
			++curves;
			if (inv > 1)
			{
				v.pass = false;
				v.detail += alg + fmt(" vs umax at load %.0f: %.0f inversions; ", l, inv);
			}
		}
	}
	v.detail += std::to_string(curves) + " curves, at most " + std::to_string(worst) + " inversion(s) each";
	return v;
}

// 5. migration counts over the whole sweep
Verdict migration_counts(const ExperimentResult& run)
{
	std::map<std::string, std::pair<double, int>> acc;
	for (const auto& r : run.rows)
	{
		acc[r.algorithm].first += double(r.migrations);
		acc[r.algorithm].second += 1;
	}
	auto mean = [&](const char* a) { return acc[a].first / std::max(1, acc[a].second); };
	const double mp = mean("mp"), sp = mean("sp"), ep = mean("ep"), jre = mean("jre");
	Verdict v;
	v.pass = mp <= sp && sp <= jre && std::abs(ep - jre) <= 0.15 * jre;
	v.detail = fmt("mean migrations mp %.3f  sp %.3f  jre %.3f  ep %.3f", mp, sp, jre, ep) + fmt(" (|ep-jre| = %.1f%% of jre)", 100 * std::abs(ep - jre) / jre);
	return v;
}

// 6. randomized allocate/release against the exhaustive scan
Verdict rsa_invariants()
{
	std::mt19937_64 rng(2024);
	auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
	int ops = 0, allocations = 0, violations = 0;
	std::string first;
	auto fail = [&](const std::string& what) {
		if (violations++ == 0)
		{
			first = what + " at op " + std::to_string(ops);
		}
	};
	while (ops < 10000)
	{
		const int cap = pick(4, 64);
		const std::size_t links = std::size_t(pick(1, 5));
		const bool guard_counts = pick(0, 1);
		SpectrumGrid g(links, cap);
		g.set_guard_counts_toward_congestion(guard_counts);
		oracle::ShadowGrid shadow(links, cap);
		std::vector<std::pair<Path, SlotRange>> live;
		for (int step = 0; step < 250 && ops < 10000; ++step, ++ops)
		{
			if (!live.empty() && pick(0, 2) == 0)
			{
				const std::size_t i = std::size_t(pick(0, int(live.size()) - 1));
				release(g, live[i].first, live[i].second);
				shadow.mark(live[i].first.links, live[i].second.start, live[i].second.span(), false);
				live.erase(live.begin() + std::ptrdiff_t(i));
			}
			else
			{
				Path p;
				for (LinkId l = 0; l < links; ++l)
				{
					if (pick(0, 1) || (l + 1 == links && p.links.empty()))
					{
						p.links.push_back(l);
					}
				}
				const int width = pick(1, 8);
				const int guard = pick(0, 2);
				const double umax = pick(1, 8) / 8.0;
				const int before_union = path_occupied_slots(g, p);
				const auto want = shadow.first_fit(p.links, width, guard, umax, guard_counts);
				const auto got = first_fit_allocate(g, p, width, guard, umax);
				if (bool(got) != bool(want) || (got && got->start != *want))
				{
					fail("first-fit start differs from exhaustive scan");
				}
				if (got)
				{
					++allocations;
					if (got->width != width || got->guard != guard || got->end() - got->start + 1 != width + guard)
					{
						fail("guard band");
					}
					for (const auto& [q, r] : live)
					{
						if (paths_share_link(p, q) && !(got->end() < r.start || r.end() < got->start))
						{
							fail("non-overlap");
						}
					}
					const int charged = guard_counts ? width + guard : width;
					if (before_union + charged > congestion_limit_slots(g, umax))
					{
						fail("congestion cap");
					}
					shadow.mark(p.links, got->start, got->span(), true);
					live.emplace_back(p, *got);
				}
			}
			// continuity: grid and shadow agree slot by slot on every link
			for (LinkId l = 0; l < links; ++l)
			{
				for (int s = 1; s <= cap; ++s)
				{
					if (g.occupied(l, s) != bool(shadow.bits[l][std::size_t(s - 1)]))
					{
						fail("continuity");
					}
				}
			}
		}
	}
	Verdict v;
	v.pass = violations == 0;
	v.detail = std::to_string(ops) + " operations, " + std::to_string(allocations) + " allocations, " + std::to_string(violations) + " violations";
	if (!first.empty())
	{
		v.detail += " (first: " + first + ")";
	}
	return v;
}

// 7. server power constants
Verdict energy_constants()
{
	PowerParams p{100, 200, 1.2};
	const double idle = server_power(p, 0, 16);
	const double full = server_power(p, 16, 16);
	double worst = 0;
	for (int z = 0; z < 16; ++z)
	{
		worst = std::max(worst, std::abs(server_power(p, z + 1, 16) - server_power(p, z, 16) - (p.peak - p.idle) / 16));
	}
	Verdict v;
	v.pass = idle == 140 && full == 240 && worst <= 64 * std::numeric_limits<double>::epsilon() * 240;
	v.detail = fmt("P(0) = %.17g W, P(16) = %.17g W, slope error %.3g", idle, full, worst);
	return v;
}

// 8. heuristic runtime at six-node scale
Verdict heuristic_runtime(const ExperimentSpec& spec)
{
	const auto net = build_network(spec);
	double worst = 0;
	for (int rep = 0; rep < spec.replications; ++rep)
	{
		auto sc = cell_scenario(spec, net, spec.loads.front(), spec.umax.front(), rep);
		for (Algorithm a : kHeuristics)
		{
			const auto t0 = std::chrono::steady_clock::now();
			run_cycle(sc, a);
			worst = std::max(worst, seconds_since(t0));
		}
	}
	return {worst < 1.0, fmt("slowest cycle %.6f s", worst)};
}

// 9. LP export determinism and constraint-family completeness
Verdict ilp_export()
{
	SimulationParams p;
	p.h_max = 1;
	p.k_paths = 1;
	auto sc = fixtures::small_scenario(fixtures::two_nodes(20), {10, 12}, {100, 240}, {{fixtures::vm(0, 2, 10)}, {}}, p);
	const auto model = build_ilp(sc);
	const auto a = to_lp_string(model);
	const auto b = to_lp_string(build_ilp(sc));
	Verdict v;
	v.pass = a == b;
	std::string missing;
	for (int tag = 4; tag <= 22; ++tag)
	{
		if (model.rows_with_tag(tag) == 0 || a.find("\\ eq" + std::to_string(tag) + "\n") == std::string::npos)
		{
			missing += " eq" + std::to_string(tag);
			v.pass = false;
		}
	}
	write_lp_file(model, "acceptance_two_dc.lp");
	const auto sol = solve_exact(sc);
	v.detail = std::string(a == b ? "identical bytes" : "exports differ") + ", " + std::to_string(model.rows().size()) + " rows" +
	           (missing.empty() ? ", all families eq4..eq22 present" : ", missing" + missing) +
	           fmt("; exact optimum %.6f written alongside acceptance_two_dc.lp", sol.objective);
	return v;
}

} // namespace

int main()
{
	int failures = 0;
	auto report = [&](int n, const char* name, const Verdict& v, double secs) {
		std::printf("criterion %d %-28s %s  %s  [%.1f s]\n", n, name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
		std::fflush(stdout);
		failures += !v.pass;
	};
	auto timed = [&](int n, const char* name, const std::function<Verdict()>& f) {
		const auto t0 = std::chrono::steady_clock::now();
		Verdict v;
		try
		{
			v = f();
		}
		catch (const std::exception& e)
		{
			v = {false, std::string("exception: ") + e.what()};
		}
		report(n, name, v, seconds_since(t0));
	};
	const unsigned threads = thread_count();

	timed(1, "oracle-dominance", oracle_dominance);

	const auto t2 = six_node_spec();
	timed(2, "six-node-ordering", [&] { return six_node_ordering(run_sweep(t2, threads)); });

	const auto desk = desk_spec();
	ExperimentResult sweep;
	std::vector<SummaryRow> summary;
	timed(3, "savings-at-lowest-load", [&] {
		sweep = run_sweep(desk, threads);
		summary = summarize(sweep.rows);
		return savings(desk, summary);
	});
	timed(4, "monotone-trends", [&] { return monotonicity(desk, summary); });
	timed(5, "migration-counts", [&] { return migration_counts(sweep); });
	timed(6, "rsa-invariants", rsa_invariants);
	timed(7, "energy-constants", energy_constants);
	timed(8, "heuristic-runtime", [&] { return heuristic_runtime(t2); });
	timed(9, "ilp-export", ilp_export);

	std::printf("%d of 9 criteria failed\n", failures);
	return failures == 0 ? 0 : 1;
}
