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
 * \file greenmig/experiment.hpp
 *
 * \brief Experiment specifications, replicated sweeps, CSV reporting, plot
 *  series and post-hoc validation of recorded runs.
 *
 * A run directory holds:
 *   spec.json        resolved specification (every field explicit)
 *   results.csv      one row per (algorithm, umax, load, replication)
 *   summary.csv      mean and sample standard deviation per cell
 *   runtime.csv      wall-clock per cycle; kept apart so results.csv is reproducible
 *   snapshots.jsonl  final state per row, when enabled
 *   STATUS           running | complete | incomplete: reason
 */

#ifndef GREENMIG_EXPERIMENT_HPP
#define GREENMIG_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include <greenmig/exact.hpp>
#include <greenmig/heuristics.hpp>
#include <greenmig/topology.hpp>
#include <greenmig/verify.hpp>
#include <greenmig/workload.hpp>

namespace greenmig {

class spec_error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

struct ExperimentSpec
{
	std::string profile = "full";
	std::string topology = "nsfnet";
	std::vector<std::string> dc_nodes; // empty: every node hosts a datacenter
	std::optional<int> slot_capacity;  // empty: topology default (300)
	std::vector<Algorithm> algorithms{Algorithm::none, Algorithm::sp, Algorithm::mp, Algorithm::ep, Algorithm::jre};
	std::vector<double> umax{0.5, 1.0};
	std::vector<double> loads{400, 440, 480, 520, 560, 600, 640, 680};
	int replications = 200;
	std::uint64_t seed = 1;
	SimulationParams params;
	WorkloadConfig workload;
	PriceModel prices;
	bool oracle = false;
	std::size_t oracle_node_limit = 50'000'000;
	bool snapshots = false;
	double background_fill = 0;

	void validate() const
	{
		if (replications < 1)
		{
			throw spec_error("field 'replications': must be >= 1");
		}
		if (algorithms.empty())
		{
			throw spec_error("field 'algorithms': must not be empty");
		}
		if (umax.empty() || loads.empty())
		{
			throw spec_error("fields 'umax' and 'loads' must not be empty");
		}
		for (double u : umax)
		{
			if (!(u > 0) || u > 1)
			{
				throw spec_error("field 'umax': every value must be in (0, 1]");
			}
		}
		for (double l : loads)
		{
			if (!(l >= 0))
			{
				throw spec_error("field 'loads': every value must be non-negative");
			}
		}
		if (background_fill < 0 || background_fill >= 1)
		{
			throw spec_error("field 'background_fill': must be in [0, 1)");
		}
		try
		{
			params.validate();
			workload.validate();
		}
		catch (const std::invalid_argument& e)
		{
			throw spec_error(e.what());
		}
	}
};

/// Desk-scale defaults: ten servers per datacenter and a tenth of the load.
inline void apply_desk_profile(ExperimentSpec& s)
{
	s.profile = "desk";
	s.params.servers_per_dc = 10;
	s.loads = {40, 44, 48, 52, 56, 60, 64, 68};
	s.replications = 20;
}

namespace detail {

template <typename T>
T spec_get(const nlohmann::json& j, const char* key)
{
	try
	{
		return j.at(key).get<T>();
	}
	catch (const nlohmann::json::exception& e)
	{
		throw spec_error(std::string("field '") + key + "': " + e.what());
	}
}

template <typename T>
std::vector<T> spec_list(const nlohmann::json& j, const char* key)
{
	const auto& v = j.at(key);
	if (v.is_array())
	{
		return spec_get<std::vector<T>>(j, key);
	}
	return {spec_get<T>(j, key)};
}

template <typename T>
std::pair<T, T> spec_range(const nlohmann::json& j, const char* key)
{
	auto v = spec_get<std::vector<T>>(j, key);
	if (v.size() != 2)
	{
		throw spec_error(std::string("field '") + key + "': expected [lo, hi]");
	}
	return {v[0], v[1]};
}

} // namespace detail

/// Parses a specification; absent fields keep the profile's defaults, unknown fields are errors.
inline ExperimentSpec parse_spec(const nlohmann::json& j)
{
	using namespace detail;
	static const std::set<std::string> known{
	    "profile", "topology", "dc_nodes", "slot_capacity", "algorithms", "umax", "loads", "mode", "replications", "seed",
	    "h_max", "kappa_gbps", "guard_slots", "k_paths", "servers_per_dc", "cores_per_server", "slot_rate_gbps", "beta_cents",
	    "alpha_cents", "alpha_range", "power", "psi_range", "sigma_range_gbps", "xi_fraction_range", "modulation",
	    "static_power", "guard_in_congestion", "oracle", "oracle_node_limit", "snapshots", "background_fill"};
	ExperimentSpec s;
	if (j.is_null())
	{
		return s;
	}
	if (!j.is_object())
	{
		throw spec_error("specification must be a JSON object");
	}
	for (const auto& [key, value] : j.items())
	{
		if (!known.count(key))
		{
			throw spec_error("field '" + key + "': unknown field");
		}
	}
	if (j.contains("profile"))
	{
		const auto p = spec_get<std::string>(j, "profile");
		if (p == "desk")
		{
			apply_desk_profile(s);
		}
		else if (p != "full")
		{
			throw spec_error("field 'profile': expected full or desk");
		}
	}
	if (j.contains("topology"))
	{
		s.topology = spec_get<std::string>(j, "topology");
	}
	if (j.contains("dc_nodes"))
	{
		s.dc_nodes = spec_get<std::vector<std::string>>(j, "dc_nodes");
	}
	if (j.contains("slot_capacity"))
	{
		s.slot_capacity = spec_get<int>(j, "slot_capacity");
		if (*s.slot_capacity < 1)
		{
			throw spec_error("field 'slot_capacity': must be >= 1");
		}
	}
	if (j.contains("algorithms"))
	{
		s.algorithms.clear();
		for (const auto& name : spec_list<std::string>(j, "algorithms"))
		{
			try
			{
				s.algorithms.push_back(parse_algorithm(name));
			}
			catch (const std::invalid_argument& e)
			{
				throw spec_error(std::string("field 'algorithms': ") + e.what());
			}
		}
	}
	if (j.contains("umax"))
	{
		s.umax = spec_list<double>(j, "umax");
	}
	if (j.contains("loads"))
	{
		s.loads = spec_list<double>(j, "loads");
	}
	if (j.contains("mode"))
	{
		const auto m = spec_get<std::string>(j, "mode");
		if (m == "poisson")
		{
			s.workload.mode = RequestMode::poisson;
		}
		else if (m == "fixed")
		{
			s.workload.mode = RequestMode::fixed;
		}
		else
		{
			throw spec_error("field 'mode': expected poisson or fixed");
		}
	}
	if (j.contains("replications"))
	{
		s.replications = spec_get<int>(j, "replications");
	}
	if (j.contains("seed"))
	{
		s.seed = spec_get<std::uint64_t>(j, "seed");
	}
	if (j.contains("h_max"))
	{
		s.params.h_max = spec_get<int>(j, "h_max");
	}
	if (j.contains("kappa_gbps"))
	{
		s.params.kappa_gbps = spec_get<double>(j, "kappa_gbps");
	}
	if (j.contains("guard_slots"))
	{
		s.params.guard_slots = spec_get<int>(j, "guard_slots");
	}
	if (j.contains("k_paths"))
	{
		s.params.k_paths = spec_get<std::size_t>(j, "k_paths");
	}
	if (j.contains("servers_per_dc"))
	{
		s.params.servers_per_dc = spec_get<int>(j, "servers_per_dc");
	}
	if (j.contains("cores_per_server"))
	{
		s.params.cores_per_server = spec_get<int>(j, "cores_per_server");
	}
	if (j.contains("slot_rate_gbps"))
	{
		s.params.slot_rate_gbps = spec_get<double>(j, "slot_rate_gbps");
	}
	if (j.contains("beta_cents"))
	{
		s.params.beta_cents = spec_get<double>(j, "beta_cents");
	}
	if (j.contains("alpha_cents"))
	{
		s.prices.table = spec_list<double>(j, "alpha_cents");
		s.prices.uniform_range.reset();
	}
	if (j.contains("alpha_range"))
	{
		s.prices.uniform_range = spec_range<double>(j, "alpha_range");
	}
	if (j.contains("power"))
	{
		const auto& pw = j.at("power");
		for (const auto& [key, value] : pw.items())
		{
			if (key != "idle" && key != "peak" && key != "pue")
			{
				throw spec_error("field 'power." + key + "': unknown field");
			}
		}
		if (pw.contains("idle"))
		{
			s.params.power.idle = spec_get<double>(pw, "idle");
		}
		if (pw.contains("peak"))
		{
			s.params.power.peak = spec_get<double>(pw, "peak");
		}
		if (pw.contains("pue"))
		{
			s.params.power.pue = spec_get<double>(pw, "pue");
		}
	}
	if (j.contains("psi_range"))
	{
		s.workload.psi_range = spec_range<int>(j, "psi_range");
	}
	if (j.contains("sigma_range_gbps"))
	{
		s.workload.sigma_range_gbps = spec_range<int>(j, "sigma_range_gbps");
	}
	if (j.contains("xi_fraction_range"))
	{
		s.workload.xi_fraction_range = spec_range<double>(j, "xi_fraction_range");
	}
	if (j.contains("modulation"))
	{
		try
		{
			s.params.modulation = ModulationTable(spec_get<std::vector<std::pair<double, int>>>(j, "modulation"));
		}
		catch (const std::invalid_argument& e)
		{
			throw spec_error(std::string("field 'modulation': ") + e.what());
		}
	}
	if (j.contains("static_power"))
	{
		const auto m = spec_get<std::string>(j, "static_power");
		if (m == "all")
		{
			s.params.static_mode = StaticPowerMode::all_servers;
		}
		else if (m == "active")
		{
			s.params.static_mode = StaticPowerMode::active_servers;
		}
		else
		{
			throw spec_error("field 'static_power': expected all or active");
		}
	}
	if (j.contains("guard_in_congestion"))
	{
		s.params.guard_counts_toward_congestion = spec_get<bool>(j, "guard_in_congestion");
	}
	if (j.contains("oracle"))
	{
		s.oracle = spec_get<bool>(j, "oracle");
	}
	if (j.contains("oracle_node_limit"))
	{
		s.oracle_node_limit = spec_get<std::size_t>(j, "oracle_node_limit");
	}
	if (j.contains("snapshots"))
	{
		s.snapshots = spec_get<bool>(j, "snapshots");
	}
	if (j.contains("background_fill"))
	{
		s.background_fill = spec_get<double>(j, "background_fill");
	}
	s.validate();
	return s;
}

/// Reads a specification file; an empty file yields the full-scale profile.
inline ExperimentSpec read_spec_file(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
	{
		throw spec_error("cannot open specification " + path);
	}
	std::stringstream buf;
	buf << in.rdbuf();
	const std::string text = buf.str();
	if (text.find_first_not_of(" \t\r\n") == std::string::npos)
	{
		return parse_spec(nlohmann::json());
	}
	try
	{
		return parse_spec(nlohmann::json::parse(text));
	}
	catch (const nlohmann::json::parse_error& e)
	{
		throw spec_error(path + ": " + e.what());
	}
}

/// Every field written out explicitly.
inline nlohmann::json spec_to_json(const ExperimentSpec& s)
{
	nlohmann::json j;
	j["profile"] = s.profile;
	j["topology"] = s.topology;
	if (!s.dc_nodes.empty())
	{
		j["dc_nodes"] = s.dc_nodes;
	}
	if (s.slot_capacity)
	{
		j["slot_capacity"] = *s.slot_capacity;
	}
	std::vector<std::string> algs;
	for (auto a : s.algorithms)
	{
		algs.emplace_back(to_string(a));
	}
	j["algorithms"] = algs;
	j["umax"] = s.umax;
	j["loads"] = s.loads;
	j["mode"] = s.workload.mode == RequestMode::poisson ? "poisson" : "fixed";
	j["replications"] = s.replications;
	j["seed"] = s.seed;
	j["h_max"] = s.params.h_max;
	j["kappa_gbps"] = s.params.kappa_gbps;
	j["guard_slots"] = s.params.guard_slots;
	j["k_paths"] = s.params.k_paths;
	j["servers_per_dc"] = s.params.servers_per_dc;
	j["cores_per_server"] = s.params.cores_per_server;
	j["slot_rate_gbps"] = s.params.slot_rate_gbps;
	j["beta_cents"] = s.params.beta_cents;
	if (s.prices.uniform_range)
	{
		j["alpha_range"] = {s.prices.uniform_range->first, s.prices.uniform_range->second};
	}
	else
	{
		j["alpha_cents"] = s.prices.table;
	}
	j["power"] = {{"idle", s.params.power.idle}, {"peak", s.params.power.peak}, {"pue", s.params.power.pue}};
	j["psi_range"] = {s.workload.psi_range.first, s.workload.psi_range.second};
	j["sigma_range_gbps"] = {s.workload.sigma_range_gbps.first, s.workload.sigma_range_gbps.second};
	j["xi_fraction_range"] = {s.workload.xi_fraction_range.first, s.workload.xi_fraction_range.second};
	nlohmann::json mod = nlohmann::json::array();
	for (const auto& [km, level] : s.params.modulation.entries())
	{
		mod.push_back({km, level});
	}
	j["modulation"] = mod;
	j["static_power"] = s.params.static_mode == StaticPowerMode::all_servers ? "all" : "active";
	j["guard_in_congestion"] = s.params.guard_counts_toward_congestion;
	j["oracle"] = s.oracle;
	j["oracle_node_limit"] = s.oracle_node_limit;
	j["snapshots"] = s.snapshots;
	j["background_fill"] = s.background_fill;
	return j;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// Topology and path table shared by every cell of an experiment.
struct ExperimentNetwork
{
	std::shared_ptr<const Topology> topology;
	std::shared_ptr<const PathTable> paths;
};

inline ExperimentNetwork build_network(const ExperimentSpec& s)
{
	try
	{
		auto desc = topology_description(s.topology, s.slot_capacity);
		if (!s.dc_nodes.empty())
		{
			desc.dc_nodes = s.dc_nodes;
		}
		auto topo = std::make_shared<const Topology>(load_topology(desc));
		auto paths = std::make_shared<const PathTable>(*topo, s.params.k_paths);
		return {topo, paths};
	}
	catch (const std::exception& e)
	{
		throw spec_error(std::string("field 'topology': ") + e.what());
	}
}

/// Per-replication seed: base seed plus replication index.
inline std::uint64_t replication_seed(const ExperimentSpec& s, int replication)
{
	return s.seed + std::uint64_t(replication);
}

/// The scenario of one sweep cell; identical across algorithms so comparisons are matched.
inline Scenario cell_scenario(const ExperimentSpec& s, const ExperimentNetwork& net, double load, double umax, int replication)
{
	SimulationParams p = s.params;
	p.upsilon_max = umax;
	WorkloadConfig w = s.workload;
	w.requests_per_dc = load;
	w.seed = replication_seed(s, replication);
	return draw_full_scenario(net.topology, net.paths, p, w, s.prices, 0, s.background_fill);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string csv_number(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.10g", v);
	return buf;
}

inline std::string csv_field(const std::string& s)
{
	if (s.find_first_of(",\"\r\n") == std::string::npos)
	{
		return s;
	}
	std::string out = "\"";
	for (char c : s)
	{
		if (c == '"')
		{
			out += '"';
		}
		out += c;
	}
	return out + '"';
}

inline std::string csv_line(const std::vector<std::string>& fields)
{
	std::string line;
	for (std::size_t i = 0; i < fields.size(); ++i)
	{
		if (i)
		{
			line += ',';
		}
		line += csv_field(fields[i]);
	}
	return line + '\n';
}

/// Splits CSV text into records (quoted fields supported).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
	std::vector<std::vector<std::string>> rows;
	std::vector<std::string> row;
	std::string field;
	bool quoted = false;
	bool any = false;
	for (std::size_t i = 0; i < text.size(); ++i)
	{
		const char c = text[i];
		if (quoted)
		{
			if (c == '"' && i + 1 < text.size() && text[i + 1] == '"')
			{
				field += '"';
				++i;
			}
			else if (c == '"')
			{
				quoted = false;
			}
			else
			{
				field += c;
			}
			continue;
		}
		if (c == '"')
		{
			quoted = true;
			any = true;
		}
		else if (c == ',')
		{
			row.push_back(std::move(field));
			field.clear();
			any = true;
		}
		else if (c == '\n')
		{
			row.push_back(std::move(field));
			field.clear();
			rows.push_back(std::move(row));
			row.clear();
			any = false;
		}
		else if (c != '\r')
		{
			field += c;
			any = true;
		}
	}
	if (any)
	{
		row.push_back(std::move(field));
		rows.push_back(std::move(row));
	}
	return rows;
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

struct ResultRow
{
	std::string algorithm; // a heuristic name, or "oracle"
	double umax = 1;
	double load = 0;
	int replication = 0;
	std::uint64_t seed = 0;
	std::string status = "ok"; // ok | not_solved
	double obj = 0;
	double obj2 = 0;
	double obj2_before = 0;
	std::size_t migrations = 0;
	std::size_t migrated_vms = 0;
	int blocked = 0;
	std::size_t rejected_requests = 0;
	double runtime_ms = 0;
	Outcome outcome;
};

struct SummaryRow
{
	std::string algorithm;
	double umax = 1;
	double load = 0;
	std::size_t n = 0;
	double obj_mean = 0, obj_sd = 0;
	double obj2_mean = 0, obj2_sd = 0;
	double migrations_mean = 0, migrations_sd = 0;
	double blocked_mean = 0, blocked_sd = 0;
};

struct ExperimentResult
{
	ExperimentSpec spec;
	std::vector<ResultRow> rows;
};

inline std::pair<double, double> mean_sd(const std::vector<double>& v)
{
	if (v.empty())
	{
		return {0, 0};
	}
	double mean = 0;
	for (double x : v)
	{
		mean += x;
	}
	mean /= double(v.size());
	if (v.size() < 2)
	{
		return {mean, 0};
	}
	double ss = 0;
	for (double x : v)
	{
		ss += (x - mean) * (x - mean);
	}
	return {mean, std::sqrt(ss / double(v.size() - 1))};
}

/// Aggregates rows per (algorithm, umax, load) in first-appearance order; unsolved rows are skipped.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows)
{
	std::vector<std::tuple<std::string, double, double>> order;
	std::map<std::tuple<std::string, double, double>, std::vector<const ResultRow*>> cells;
	for (const auto& r : rows)
	{
		if (r.status != "ok")
		{
			continue;
		}
		auto key = std::make_tuple(r.algorithm, r.umax, r.load);
		auto [it, inserted] = cells.try_emplace(key);
		if (inserted)
		{
			order.push_back(key);
		}
		it->second.push_back(&r);
	}
	std::vector<SummaryRow> out;
	for (const auto& key : order)
	{
		const auto& members = cells[key];
		std::vector<double> obj, obj2, mig, blk;
		for (const ResultRow* r : members)
		{
			obj.push_back(r->obj);
			obj2.push_back(r->obj2);
			mig.push_back(double(r->migrations));
			blk.push_back(double(r->blocked));
		}
		SummaryRow s;
		std::tie(s.algorithm, s.umax, s.load) = key;
		s.n = members.size();
		std::tie(s.obj_mean, s.obj_sd) = mean_sd(obj);
		std::tie(s.obj2_mean, s.obj2_sd) = mean_sd(obj2);
		std::tie(s.migrations_mean, s.migrations_sd) = mean_sd(mig);
		std::tie(s.blocked_mean, s.blocked_sd) = mean_sd(blk);
		out.push_back(s);
	}
	return out;
}

/// Worker threads from GREENMIG_THREADS, defaulting to the hardware concurrency.
inline unsigned thread_count()
{
	if (const char* env = std::getenv("GREENMIG_THREADS"))
	{
		const int n = std::atoi(env);
		if (n >= 1)
		{
			return unsigned(n);
		}
	}
	return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs the full factorial sweep (load x replication x umax x algorithm).
 * Cells run concurrently; rows come back in sweep order.
 */
inline ExperimentResult run_sweep(const ExperimentSpec& spec, unsigned threads = 1)
{
	spec.validate();
	const auto net = build_network(spec);
	struct Cell
	{
		double load;
		int rep;
		double umax;
	};
	std::vector<Cell> cells;
	for (double load : spec.loads)
	{
		for (int rep = 0; rep < spec.replications; ++rep)
		{
			for (double u : spec.umax)
			{
				cells.push_back({load, rep, u});
			}
		}
	}
	const std::size_t per_cell = spec.algorithms.size() + (spec.oracle ? 1 : 0);
	std::vector<ResultRow> rows(cells.size() * per_cell);
	std::atomic<std::size_t> next{0};
	std::exception_ptr error;
	std::mutex error_mutex;

	auto worker = [&]() {
		for (;;)
		{
			const std::size_t c = next++;
			if (c >= cells.size())
			{
				return;
			}
			try
			{
				const auto& cell = cells[c];
				const Scenario sc = cell_scenario(spec, net, cell.load, cell.umax, cell.rep);
				for (std::size_t a = 0; a < per_cell; ++a)
				{
					ResultRow& r = rows[c * per_cell + a];
					r.umax = cell.umax;
					r.load = cell.load;
					r.replication = cell.rep;
					r.seed = replication_seed(spec, cell.rep);
					r.rejected_requests = sc.rejected_requests;
					const auto t0 = std::chrono::steady_clock::now();
					if (a < spec.algorithms.size())
					{
						const auto rep = run_cycle(sc, spec.algorithms[a]);
						r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
						r.algorithm = std::string(to_string(spec.algorithms[a]));
						r.obj = rep.obj;
						r.obj2 = rep.obj2;
						r.obj2_before = rep.obj2_before;
						r.migrations = rep.migrations;
						r.migrated_vms = rep.migrated_vms;
						r.blocked = rep.blocked;
						r.outcome = outcome_of(rep);
					}
					else
					{
						ExactLimits lim;
						lim.max_nodes = spec.oracle_node_limit;
						const auto sol = solve_exact(sc, lim);
						r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
						r.algorithm = "oracle";
						r.obj2_before = brown_cost(sc.initial_datacenters(), sc.params.power, sc.params.static_mode);
						if (sol.optimal())
						{
							r.obj = sol.objective;
							r.obj2 = sol.obj2;
							r.migrations = sol.batches.size();
							for (const auto& b : sol.batches)
							{
								r.migrated_vms += b.vms.size();
							}
							r.outcome = sol.outcome();
						}
						else
						{
							r.status = "not_solved";
						}
					}
				}
			}
			catch (...)
			{
				std::lock_guard<std::mutex> lock(error_mutex);
				if (!error)
				{
					error = std::current_exception();
				}
				next = cells.size();
				return;
			}
		}
	};
	threads = std::max(1u, std::min<unsigned>(threads, unsigned(cells.size())));
	if (threads == 1)
	{
		worker();
	}
	else
	{
		std::vector<std::thread> pool;
		for (unsigned t = 0; t < threads; ++t)
		{
			pool.emplace_back(worker);
		}
		for (auto& t : pool)
		{
			t.join();
		}
	}
	if (error)
	{
		std::rethrow_exception(error);
	}
	return {spec, std::move(rows)};
}

inline std::string results_csv(const std::vector<ResultRow>& rows)
{
	std::string out = csv_line({"algorithm", "umax", "load", "replication", "seed", "status", "obj", "obj2", "obj2_before", "migrations",
	                            "migrated_vms", "blocked", "rejected_requests"});
	for (const auto& r : rows)
	{
		const bool ok = r.status == "ok";
		out += csv_line({r.algorithm, csv_number(r.umax), csv_number(r.load), std::to_string(r.replication), std::to_string(r.seed), r.status,
		                 ok ? csv_number(r.obj) : "", ok ? csv_number(r.obj2) : "", csv_number(r.obj2_before),
		                 ok ? std::to_string(r.migrations) : "", ok ? std::to_string(r.migrated_vms) : "", std::to_string(r.blocked),
		                 std::to_string(r.rejected_requests)});
	}
	return out;
}

inline std::string runtime_csv(const std::vector<ResultRow>& rows)
{
	std::string out = csv_line({"algorithm", "umax", "load", "replication", "runtime_ms"});
	for (const auto& r : rows)
	{
		out += csv_line({r.algorithm, csv_number(r.umax), csv_number(r.load), std::to_string(r.replication), csv_number(r.runtime_ms)});
	}
	return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows)
{
	std::string out = csv_line({"algorithm", "umax", "load", "n", "obj_mean", "obj_sd", "obj2_mean", "obj2_sd", "migrations_mean",
	                            "migrations_sd", "blocked_mean", "blocked_sd"});
	for (const auto& s : rows)
	{
		out += csv_line({s.algorithm, csv_number(s.umax), csv_number(s.load), std::to_string(s.n), csv_number(s.obj_mean),
		                 csv_number(s.obj_sd), csv_number(s.obj2_mean), csv_number(s.obj2_sd), csv_number(s.migrations_mean),
		                 csv_number(s.migrations_sd), csv_number(s.blocked_mean), csv_number(s.blocked_sd)});
	}
	return out;
}

inline nlohmann::json snapshot_json(const ResultRow& r)
{
	nlohmann::json batches = nlohmann::json::array();
	for (const auto& b : r.outcome.batches)
	{
		batches.push_back({{"source", b.source_dc},
		                   {"dest", b.dest_dc},
		                   {"vms", b.vms},
		                   {"theta_gbps", b.theta_gbps},
		                   {"path", b.path.nodes},
		                   {"modulation_level", b.modulation_level},
		                   {"start", b.slots.start},
		                   {"width", b.slots.width},
		                   {"guard", b.slots.guard}});
	}
	return {{"algorithm", r.algorithm}, {"umax", r.umax},   {"load", r.load},       {"replication", r.replication},
	        {"seed", r.seed},           {"obj", r.obj},     {"obj2", r.obj2},       {"obj2_before", r.obj2_before},
	        {"batches", batches},       {"vm_dc", r.outcome.vm_dc}, {"vm_server", r.outcome.vm_server}};
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
	std::ofstream f(p, std::ios::binary);
	if (!f)
	{
		throw std::runtime_error("cannot write " + p.string());
	}
	f << text;
	if (!f.flush())
	{
		throw std::runtime_error("write to " + p.string() + " failed");
	}
}

inline std::string read_text(const std::filesystem::path& p)
{
	std::ifstream f(p, std::ios::binary);
	if (!f)
	{
		throw std::runtime_error("cannot read " + p.string());
	}
	std::stringstream ss;
	ss << f.rdbuf();
	return ss.str();
}

} // namespace detail

/**
 * Runs the sweep and writes the run directory. STATUS reads "running" while
 * the sweep executes and is replaced by "complete" only after every file is
 * written, so an interrupted run is never mistaken for a finished one.
 */
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir, unsigned threads = thread_count())
{
	std::filesystem::create_directories(out_dir);
	const auto status = out_dir / "STATUS";
	detail::write_text(status, "running\n");
	try
	{
		auto result = run_sweep(spec, threads);
		detail::write_text(out_dir / "spec.json", spec_to_json(spec).dump(2) + "\n");
		detail::write_text(out_dir / "results.csv", results_csv(result.rows));
		detail::write_text(out_dir / "runtime.csv", runtime_csv(result.rows));
		detail::write_text(out_dir / "summary.csv", summary_csv(summarize(result.rows)));
		if (spec.snapshots)
		{
			std::string lines;
			for (const auto& r : result.rows)
			{
				if (r.status == "ok")
				{
					lines += snapshot_json(r).dump() + "\n";
				}
			}
			detail::write_text(out_dir / "snapshots.jsonl", lines);
		}
		detail::write_text(status, "complete\n");
		return result;
	}
	catch (const std::exception& e)
	{
		detail::write_text(status, std::string("incomplete: ") + e.what() + "\n");
		throw;
	}
}

// ---------------------------------------------------------------------------
// Plot series
// ---------------------------------------------------------------------------

/// Summary rows loaded back from a run directory.
inline std::vector<SummaryRow> read_summary(const std::filesystem::path& dir)
{
	const auto rows = parse_csv(detail::read_text(dir / "summary.csv"));
	std::vector<SummaryRow> out;
	for (std::size_t i = 1; i < rows.size(); ++i)
	{
		const auto& f = rows[i];
		if (f.size() != 12)
		{
			throw std::runtime_error("summary.csv line " + std::to_string(i + 1) + " has " + std::to_string(f.size()) + " fields");
		}
		SummaryRow s;
		s.algorithm = f[0];
		s.umax = std::stod(f[1]);
		s.load = std::stod(f[2]);
		s.n = std::stoul(f[3]);
		s.obj_mean = std::stod(f[4]);
		s.obj_sd = std::stod(f[5]);
		s.obj2_mean = std::stod(f[6]);
		s.obj2_sd = std::stod(f[7]);
		s.migrations_mean = std::stod(f[8]);
		s.migrations_sd = std::stod(f[9]);
		s.blocked_mean = std::stod(f[10]);
		s.blocked_sd = std::stod(f[11]);
		out.push_back(s);
	}
	return out;
}

class missing_slice : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

struct PlotPoint
{
	std::string algorithm;
	double x = 0;
	double y = 0;
};

/**
 * Series for brown-cost-vs-load, migrations-vs-load (fixed umax) or
 * cost-vs-umax (fixed load). The fixed coordinate may be omitted when the
 * results hold a single value for it.
 */
inline std::vector<PlotPoint> plot_series(const std::vector<SummaryRow>& summary,
                                          const std::string& figure,
                                          std::optional<double> umax = std::nullopt,
                                          std::optional<double> load = std::nullopt)
{
	const bool by_load = figure == "brown-cost-vs-load" || figure == "migrations-vs-load";
	if (!by_load && figure != "cost-vs-umax")
	{
		throw std::invalid_argument("unknown figure '" + figure + "' (expected brown-cost-vs-load | migrations-vs-load | cost-vs-umax)");
	}
	if (summary.empty())
	{
		throw missing_slice("no results");
	}
	std::vector<std::string> algs;
	std::set<double> umaxes, loads;
	for (const auto& s : summary)
	{
		if (std::find(algs.begin(), algs.end(), s.algorithm) == algs.end())
		{
			algs.push_back(s.algorithm);
		}
		umaxes.insert(s.umax);
		loads.insert(s.load);
	}
	auto pick = [](std::optional<double> given, const std::set<double>& all, const char* name) {
		if (given)
		{
			return *given;
		}
		if (all.size() != 1)
		{
			throw std::invalid_argument(std::string("figure needs --") + name + " (results hold several values)");
		}
		return *all.begin();
	};
	const double fixed = by_load ? pick(umax, umaxes, "umax") : pick(load, loads, "load");
	const std::set<double>& xs = by_load ? loads : umaxes;

	std::vector<PlotPoint> out;
	std::string missing;
	for (const auto& a : algs)
	{
		for (double x : xs)
		{
			const double u = by_load ? fixed : x;
			const double l = by_load ? x : fixed;
			auto it = std::find_if(summary.begin(), summary.end(), [&](const SummaryRow& s) { return s.algorithm == a && s.umax == u && s.load == l; });
			if (it == summary.end())
			{
				missing += " (" + a + ", umax=" + csv_number(u) + ", load=" + csv_number(l) + ")";
				continue;
			}
			out.push_back({a, x, figure == "migrations-vs-load" ? it->migrations_mean : it->obj2_mean});
		}
	}
	if (!missing.empty())
	{
		throw missing_slice("missing cells:" + missing);
	}
	return out;
}

inline std::string plot_csv(const std::vector<PlotPoint>& points)
{
	std::string out = csv_line({"algorithm", "x", "y"});
	for (const auto& p : points)
	{
		out += csv_line({p.algorithm, csv_number(p.x), csv_number(p.y)});
	}
	return out;
}

inline std::string emit_plot_data(const std::filesystem::path& dir,
                                  const std::string& figure,
                                  std::optional<double> umax = std::nullopt,
                                  std::optional<double> load = std::nullopt)
{
	return plot_csv(plot_series(read_summary(dir), figure, umax, load));
}

// ---------------------------------------------------------------------------
// Validation of recorded runs
// ---------------------------------------------------------------------------

struct CheckResult
{
	std::string invariant;
	bool passed = true;
	std::size_t checked = 0;
	std::string counterexample; // first failure, with its seed
};

struct ValidationReport
{
	std::vector<CheckResult> checks;

	bool passed() const
	{
		return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
	}

	std::string text() const
	{
		std::string out;
		for (const auto& c : checks)
		{
			out += (c.passed ? "PASS " : "FAIL ") + c.invariant + " (" + std::to_string(c.checked) + " checked)";
			if (!c.passed)
			{
				out += ": " + c.counterexample;
			}
			out += "\n";
		}
		return out;
	}
};

namespace detail {

inline ResultRow row_from_snapshot(const nlohmann::json& j, const Topology& topo)
{
	ResultRow r;
	r.algorithm = j.at("algorithm").get<std::string>();
	r.umax = j.at("umax").get<double>();
	r.load = j.at("load").get<double>();
	r.replication = j.at("replication").get<int>();
	r.seed = j.at("seed").get<std::uint64_t>();
	r.obj = j.at("obj").get<double>();
	r.obj2 = j.at("obj2").get<double>();
	r.obj2_before = j.at("obj2_before").get<double>();
	r.outcome.objective = r.obj;
	r.outcome.obj2 = r.obj2;
	r.outcome.vm_dc = j.at("vm_dc").get<std::vector<std::size_t>>();
	r.outcome.vm_server = j.at("vm_server").get<std::vector<std::size_t>>();
	for (const auto& b : j.at("batches"))
	{
		MigrationBatch mb;
		mb.index = r.outcome.batches.size() + 1;
		mb.source_dc = b.at("source").get<std::size_t>();
		mb.dest_dc = b.at("dest").get<std::size_t>();
		mb.vms = b.at("vms").get<std::vector<VmId>>();
		mb.theta_gbps = b.at("theta_gbps").get<double>();
		mb.path = topo.make_path(b.at("path").get<std::vector<NodeId>>());
		mb.modulation_level = b.at("modulation_level").get<int>();
		mb.slots = SlotRange{b.at("start").get<int>(), b.at("width").get<int>(), b.at("guard").get<int>()};
		r.outcome.batches.push_back(std::move(mb));
	}
	r.migrations = r.outcome.batches.size();
	return r;
}

} // namespace detail

/**
 * Re-runs every module's invariant suite over a recorded run: regenerates
 * each scenario from spec.json, replays each snapshot through the
 * independent checker, compares against the no-migration baseline and the
 * oracle, and recomputes the summary from the per-replication rows.
 */
inline ValidationReport validate_run(const std::filesystem::path& dir)
{
	ValidationReport report;
	std::map<std::string, CheckResult> checks;
	std::vector<std::string> order;
	auto check = [&](const std::string& name, bool ok, const std::string& detail) {
		auto [it, inserted] = checks.try_emplace(name, CheckResult{name, true, 0, {}});
		if (inserted)
		{
			order.push_back(name);
		}
		++it->second.checked;
		if (!ok && it->second.passed)
		{
			it->second.passed = false;
			it->second.counterexample = detail;
		}
	};

	const std::string status = detail::read_text(dir / "STATUS");
	check("run-complete", status.rfind("complete", 0) == 0, "STATUS is '" + status.substr(0, status.find('\n')) + "'");
	const auto spec = parse_spec(nlohmann::json::parse(detail::read_text(dir / "spec.json")));
	const auto net = build_network(spec);

	// summary equals recomputation from results.csv
	{
		const auto rows = parse_csv(detail::read_text(dir / "results.csv"));
		std::vector<ResultRow> parsed;
		for (std::size_t i = 1; i < rows.size(); ++i)
		{
			const auto& f = rows[i];
			ResultRow r;
			r.algorithm = f.at(0);
			r.umax = std::stod(f.at(1));
			r.load = std::stod(f.at(2));
			r.replication = std::stoi(f.at(3));
			r.status = f.at(5);
			if (r.status == "ok")
			{
				r.obj = std::stod(f.at(6));
				r.obj2 = std::stod(f.at(7));
				r.migrations = std::stoul(f.at(9));
			}
			r.blocked = std::stoi(f.at(11));
			parsed.push_back(r);
		}
		const std::string expected = summary_csv(summarize(parsed));
		const std::string actual = detail::read_text(dir / "summary.csv");
		// results.csv values are rounded to 10 significant digits, so compare numerically
		const auto a = parse_csv(actual);
		const auto e = parse_csv(expected);
		bool same = a.size() == e.size();
		for (std::size_t i = 0; same && i < a.size(); ++i)
		{
			same = a[i].size() == e[i].size();
			for (std::size_t k = 0; same && k < a[i].size(); ++k)
			{
				if (a[i][k] == e[i][k])
				{
					continue;
				}
				try
				{
					const double x = std::stod(a[i][k]);
					const double y = std::stod(e[i][k]);
					same = std::abs(x - y) <= 1e-6 * std::max(1.0, std::abs(y));
				}
				catch (const std::exception&)
				{
					same = false;
				}
			}
		}
		check("summary-recomputation", same, "summary.csv differs from the recomputed means");
	}

	const auto snap_path = dir / "snapshots.jsonl";
	if (!std::filesystem::exists(snap_path))
	{
		check("snapshots-present", false, "run was recorded without snapshots");
	}
	else
	{
		std::istringstream lines(detail::read_text(snap_path));
		std::string line;
		std::map<std::tuple<double, double, int>, std::map<std::string, double>> objs;
		std::map<std::tuple<double, double, int>, std::unique_ptr<Scenario>> scenarios;
		while (std::getline(lines, line))
		{
			if (line.empty())
			{
				continue;
			}
			const auto j = nlohmann::json::parse(line);
			ResultRow r;
			const std::string where = "algorithm " + j.value("algorithm", std::string("?")) + " seed " + std::to_string(j.value("seed", 0ull)) +
			                          " load " + csv_number(j.value("load", 0.0)) + " umax " + csv_number(j.value("umax", 0.0));
			try
			{
				r = detail::row_from_snapshot(j, *net.topology);
			}
			catch (const std::exception& e)
			{
				check("snapshot-parse", false, where + ": " + e.what());
				continue;
			}
			const auto key = std::make_tuple(r.load, r.umax, r.replication);
			auto& sc = scenarios[key];
			if (!sc)
			{
				sc = std::make_unique<Scenario>(cell_scenario(spec, net, r.load, r.umax, r.replication));
			}
			std::map<std::string, std::string> first;
			for (const auto& v : check_outcome(*sc, r.outcome))
			{
				first.try_emplace(v.invariant, v.detail);
			}
			for (const char* inv : {"moved-once", "batch-vms", "batch-endpoints", "path", "modulation", "kappa", "bandwidth", "slot-width", "guard",
			                        "spectrum-bounds", "non-overlap", "congestion-cap", "h-max", "placement", "cores", "obj2", "objective"})
			{
				auto it = first.find(inv);
				check(inv, it == first.end(), it == first.end() ? "" : where + ": " + it->second);
			}
			const double baseline = brown_cost(sc->initial_datacenters(), sc->params.power, sc->params.static_mode);
			check("baseline", std::abs(baseline - r.obj2_before) <= 1e-6 * std::max(1.0, baseline), where + ": recorded baseline differs");
			if (r.algorithm != "oracle")
			{
				check("obj2-not-above-baseline", r.obj2 <= baseline + 1e-6, where + ": obj2 " + csv_number(r.obj2) + " > " + csv_number(baseline));
			}
			objs[key][r.algorithm] = r.obj;
		}
		for (const auto& [key, by_alg] : objs)
		{
			auto it = by_alg.find("oracle");
			if (it == by_alg.end())
			{
				continue;
			}
			for (const auto& [alg, obj] : by_alg)
			{
				check("oracle-not-above-heuristic", it->second <= obj + 1e-6,
				      "seed " + std::to_string(replication_seed(spec, std::get<2>(key))) + " load " + csv_number(std::get<0>(key)) + ": oracle " +
				          csv_number(it->second) + " > " + alg + " " + csv_number(obj));
			}
		}
	}
	for (const auto& name : order)
	{
		report.checks.push_back(checks[name]);
	}
	return report;
}

} // namespace greenmig

#endif // GREENMIG_EXPERIMENT_HPP
