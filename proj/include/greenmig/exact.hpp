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
 * \file greenmig/exact.hpp
 *
 * \brief Integer program for one migration cycle, CPLEX-LP export, and a
 *  branch-and-bound solver for tiny instances.
 *
 * The model is path based: every ordered datacenter pair gets its K
 * candidate paths and every source gets h_max batch indices. Rows are tagged
 * with the number of the constraint family they implement (4..22).
 *
 * The native solver does not search over slot indices. It enumerates, per
 * datacenter, how requests are split into batches and destinations, and
 * for each candidate decides spectrum feasibility by trying every batch
 * order and path choice under sequential first-fit. Any non-overlapping
 * assignment can be shifted down slot by slot until each lightpath touches
 * its predecessor or slot 1 without changing which pairs overlap, and the
 * resulting left-packed layout is what first-fit produces for the matching
 * order, so no optimum is lost.
 */

#ifndef GREENMIG_EXACT_HPP
#define GREENMIG_EXACT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <greenmig/energy.hpp>
#include <greenmig/heuristics.hpp>
#include <greenmig/spectrum.hpp>
#include <greenmig/topology.hpp>
#include <greenmig/verify.hpp>
#include <greenmig/workload.hpp>

namespace greenmig {

class model_too_large : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

enum class VarType
{
	binary,
	integer,
	continuous
};

struct IlpVariable
{
	std::string name;
	std::string family;
	VarType type = VarType::continuous;
	double lower = 0;
	std::optional<double> upper;
};

struct IlpTerm
{
	std::size_t var = 0;
	double coef = 0;
};

enum class RowSense
{
	le,
	ge,
	eq
};

struct IlpRow
{
	std::string name;
	int tag = 0;
	std::vector<IlpTerm> terms;
	RowSense sense = RowSense::le;
	double rhs = 0;
};

struct IlpOptions
{
	std::size_t max_rows = 200000;
};

class IlpModel
{
public:
	std::size_t add_variable(std::string name, std::string family, VarType type, double lower = 0, std::optional<double> upper = std::nullopt)
	{
		const std::size_t id = variables_.size();
		if (!index_.emplace(name, id).second)
		{
			throw std::logic_error("duplicate variable " + name);
		}
		++family_counts_[family];
		variables_.push_back({std::move(name), std::move(family), type, lower, upper});
		return id;
	}

	void add_row(IlpRow row)
	{
		if (row.terms.empty())
		{
			return;
		}
		if (rows_.size() >= max_rows_)
		{
			throw model_too_large("model exceeds the row budget of " + std::to_string(max_rows_));
		}
		rows_.push_back(std::move(row));
	}

	void add_objective(std::size_t var, double coef) { objective_.push_back({var, coef}); }

	const std::vector<IlpVariable>& variables() const { return variables_; }
	const std::vector<IlpRow>& rows() const { return rows_; }
	const std::vector<IlpTerm>& objective() const { return objective_; }

	std::optional<std::size_t> find(const std::string& name) const
	{
		auto it = index_.find(name);
		if (it == index_.end())
		{
			return std::nullopt;
		}
		return it->second;
	}

	std::size_t family_count(const std::string& family) const
	{
		auto it = family_counts_.find(family);
		return it == family_counts_.end() ? 0 : it->second;
	}

	std::size_t rows_with_tag(int tag) const
	{
		return std::size_t(std::count_if(rows_.begin(), rows_.end(), [&](const IlpRow& r) { return r.tag == tag; }));
	}

	double big_m() const { return big_m_; }
	void set_big_m(double m) { big_m_ = m; }
	void set_max_rows(std::size_t n) { max_rows_ = n; }

private:
	std::vector<IlpVariable> variables_;
	std::vector<IlpRow> rows_;
	std::vector<IlpTerm> objective_;
	std::unordered_map<std::string, std::size_t> index_;
	std::map<std::string, std::size_t> family_counts_;
	double big_m_ = 0;
	std::size_t max_rows_ = 200000;
};

namespace detail {

inline std::string join_name(const char* prefix, std::initializer_list<std::size_t> idx)
{
	std::string s = prefix;
	for (std::size_t i : idx)
	{
		s += '_';
		s += std::to_string(i);
	}
	return s;
}

/// Batch count per source datacenter: h_max, or one per request when unlimited.
inline std::size_t batch_slots(const Scenario& sc, std::size_t requests)
{
	return sc.params.h_max > 0 ? std::size_t(sc.params.h_max) : std::max<std::size_t>(1, requests);
}

struct PathVar
{
	std::size_t d, m, k, h; // 0-based source, dest, path rank, batch
	const Path* path;
	std::size_t y, b, f;
};

} // namespace detail

/**
 * Builds the integer program for a scenario. Variable and row order depend
 * only on the scenario's sizes, so the model (and its export) is
 * deterministic.
 */
inline IlpModel build_ilp(const Scenario& sc, const IlpOptions& opt = {})
{
	using detail::join_name;
	const auto& p = sc.params;
	const std::size_t n_dc = sc.dc_count();
	const std::size_t n_srv = std::size_t(p.servers_per_dc);
	const double pd = p.dynamic_per_core();
	const double ps = p.power.static_power();
	const int G = p.guard_slots;
	const int ce = sc.grid.capacity();
	if (p.static_mode == StaticPowerMode::active_servers)
	{
		throw std::invalid_argument("build_ilp: the model charges static power for every server");
	}
	const int cap_slots = congestion_limit_slots(sc.grid, p.upsilon_max);

	IlpModel model;
	model.set_max_rows(opt.max_rows);

	std::vector<std::vector<VmId>> home(n_dc);
	for (const auto& v : sc.vms)
	{
		home[v.home_dc].push_back(v.id);
	}

	int demand_slots = 0;
	for (const auto& v : sc.vms)
	{
		demand_slots += slots_for_bandwidth(v.bandwidth_gbps, 1, p.slot_rate_gbps) + G;
	}
	const double F = double(std::max(demand_slots, ce + G + 1));
	model.set_big_m(F);

	// x: request i stays on server n of its home m
	std::map<std::pair<std::size_t, VmId>, std::size_t> x;
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		for (std::size_t n = 0; n < n_srv; ++n)
		{
			for (VmId i : home[m])
			{
				x[{n, i}] = model.add_variable(join_name("x", {m + 1, n + 1, i + 1}), "x", VarType::binary);
			}
		}
	}
	std::vector<std::size_t> z(sc.vms.size());
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (VmId i : home[d])
		{
			z[i] = model.add_variable(join_name("z", {d + 1, i + 1}), "z", VarType::binary);
		}
	}
	// omega: request i of datacenter d lands on server n of m != d
	std::map<std::tuple<std::size_t, std::size_t, VmId>, std::size_t> w;
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		for (std::size_t n = 0; n < n_srv; ++n)
		{
			for (std::size_t d = 0; d < n_dc; ++d)
			{
				if (d == m)
				{
					continue;
				}
				for (VmId i : home[d])
				{
					w[{m, n, i}] = model.add_variable(join_name("w", {m + 1, n + 1, d + 1, i + 1}), "omega", VarType::binary);
				}
			}
		}
	}

	// y, b, f per (source, dest, path rank, batch); theta per (source, dest, batch)
	std::vector<detail::PathVar> pv;
	std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> theta;
	std::vector<std::size_t> H(n_dc);
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		H[d] = detail::batch_slots(sc, home[d].size());
		for (std::size_t h = 0; h < H[d]; ++h)
		{
			for (std::size_t m = 0; m < n_dc; ++m)
			{
				if (m == d)
				{
					continue;
				}
				const auto& paths = sc.paths->between(d, m);
				for (std::size_t k = 0; k < paths.size(); ++k)
				{
					detail::PathVar v{d, m, k, h, &paths[k], 0, 0, 0};
					v.y = model.add_variable(join_name("y", {d + 1, m + 1, k + 1, h + 1}), "y", VarType::binary);
					pv.push_back(v);
				}
			}
		}
	}
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (std::size_t h = 0; h < H[d]; ++h)
		{
			for (std::size_t m = 0; m < n_dc; ++m)
			{
				if (m == d)
				{
					continue;
				}
				int lmax = 0;
				for (const auto& path : sc.paths->between(d, m))
				{
					lmax = std::max(lmax, modulation_level(path, p.modulation));
				}
				theta[{d, m, h}] = model.add_variable(join_name("t", {d + 1, m + 1, h + 1}), "theta", VarType::integer, 0, p.kappa_gbps * lmax);
			}
		}
	}
	for (auto& v : pv)
	{
		v.b = model.add_variable(join_name("b", {v.d + 1, v.m + 1, v.k + 1, v.h + 1}), "b", VarType::integer, 0, F);
	}
	for (auto& v : pv)
	{
		v.f = model.add_variable(join_name("f", {v.d + 1, v.m + 1, v.k + 1, v.h + 1}), "f", VarType::integer, 0, F);
	}
	// delta for path-variable pairs of different (source, batch) sharing a link; gamma = 1 for these
	struct Pair
	{
		std::size_t a, c, delta;
	};
	std::vector<Pair> pairs;
	for (std::size_t a = 0; a < pv.size(); ++a)
	{
		for (std::size_t c = a + 1; c < pv.size(); ++c)
		{
			if ((pv[a].d == pv[c].d && pv[a].h == pv[c].h) || !paths_share_link(*pv[a].path, *pv[c].path))
			{
				continue;
			}
			const auto& A = pv[a];
			const auto& C = pv[c];
			const std::size_t dl = model.add_variable(
			    join_name("dl", {A.d + 1, A.m + 1, A.k + 1, A.h + 1, C.d + 1, C.m + 1, C.k + 1, C.h + 1}), "delta", VarType::binary);
			pairs.push_back({a, c, dl});
		}
	}
	std::vector<std::size_t> phi(n_dc);
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		phi[m] = model.add_variable(join_name("Phi", {m + 1}), "Phi", VarType::continuous);
	}

	// objective
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		model.add_objective(phi[m], sc.alpha[m]);
	}
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (VmId i : home[d])
		{
			model.add_objective(z[i], sc.beta[d] * sc.vms[i].bandwidth_gbps);
		}
	}
	for (const auto& v : pv)
	{
		model.add_objective(v.y, sc.beta[v.d]);
	}

	// 4: every request is served exactly once
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		for (VmId i : home[m])
		{
			IlpRow r{join_name("eq4", {m + 1, i + 1}), 4, {}, RowSense::eq, 1};
			for (std::size_t n = 0; n < n_srv; ++n)
			{
				r.terms.push_back({x[{n, i}], 1});
			}
			r.terms.push_back({z[i], 1});
			model.add_row(std::move(r));
		}
	}
	// 5: a migrated request lands on exactly one foreign server
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (VmId i : home[d])
		{
			IlpRow r{join_name("eq5", {d + 1, i + 1}), 5, {}, RowSense::eq, 0};
			for (std::size_t m = 0; m < n_dc; ++m)
			{
				for (std::size_t n = 0; n < n_srv && m != d; ++n)
				{
					r.terms.push_back({w[{m, n, i}], 1});
				}
			}
			r.terms.push_back({z[i], -1});
			model.add_row(std::move(r));
		}
	}
	// 6: server cores
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		for (std::size_t n = 0; n < n_srv; ++n)
		{
			IlpRow r{join_name("eq6", {m + 1, n + 1}), 6, {}, RowSense::le, double(p.cores_per_server)};
			for (VmId i : home[m])
			{
				r.terms.push_back({x[{n, i}], double(sc.vms[i].cores)});
			}
			for (std::size_t d = 0; d < n_dc; ++d)
			{
				for (VmId i : home[d])
				{
					if (d != m)
					{
						r.terms.push_back({w[{m, n, i}], double(sc.vms[i].cores)});
					}
				}
			}
			model.add_row(std::move(r));
		}
	}
	// 7, 8: brown energy
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		IlpRow r{join_name("eq7", {m + 1}), 7, {{phi[m], 1}}, RowSense::ge, double(n_srv) * ps - sc.renewable[m]};
		for (std::size_t n = 0; n < n_srv; ++n)
		{
			for (VmId i : home[m])
			{
				r.terms.push_back({x[{n, i}], -pd * sc.vms[i].cores});
			}
			for (std::size_t d = 0; d < n_dc; ++d)
			{
				for (VmId i : home[d])
				{
					if (d != m)
					{
						r.terms.push_back({w[{m, n, i}], -pd * sc.vms[i].cores});
					}
				}
			}
		}
		model.add_row(std::move(r));
		model.add_row({join_name("eq8", {m + 1}), 8, {{phi[m], 1}}, RowSense::ge, 0});
	}
	// 9: batches carry at least the migrated bandwidth
	for (std::size_t m = 0; m < n_dc; ++m)
	{
		for (std::size_t d = 0; d < n_dc; ++d)
		{
			if (d == m)
			{
				continue;
			}
			IlpRow r{join_name("eq9", {m + 1, d + 1}), 9, {}, RowSense::ge, 0};
			for (std::size_t h = 0; h < H[d]; ++h)
			{
				r.terms.push_back({theta[{d, m, h}], 1});
			}
			for (std::size_t n = 0; n < n_srv; ++n)
			{
				for (VmId i : home[d])
				{
					r.terms.push_back({w[{m, n, i}], -sc.vms[i].bandwidth_gbps});
				}
			}
			model.add_row(std::move(r));
		}
	}
	// 10, 11, 13: path selection tied to batch bandwidth
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (std::size_t h = 0; h < H[d]; ++h)
		{
			for (std::size_t m = 0; m < n_dc; ++m)
			{
				if (m == d)
				{
					continue;
				}
				const std::size_t t = theta[{d, m, h}];
				const double tmax = *model.variables()[t].upper;
				IlpRow r10{join_name("eq10", {m + 1, d + 1, h + 1}), 10, {}, RowSense::ge, 0};
				IlpRow r11{join_name("eq11", {m + 1, d + 1, h + 1}), 11, {}, RowSense::le, 0};
				IlpRow r13{join_name("eq13", {m + 1, d + 1, h + 1}), 13, {}, RowSense::ge, 0};
				for (const auto& v : pv)
				{
					if (v.d == d && v.m == m && v.h == h)
					{
						r10.terms.push_back({v.y, tmax});
						r11.terms.push_back({v.y, 1});
						r13.terms.push_back({v.b, p.slot_rate_gbps * modulation_level(*v.path, p.modulation)});
					}
				}
				r10.terms.push_back({t, -1});
				r11.terms.push_back({t, -1});
				r13.terms.push_back({t, -1});
				model.add_row(std::move(r10));
				model.add_row(std::move(r11));
				model.add_row(std::move(r13));
			}
		}
	}
	// 12, 14: one path per batch, bandwidth cap by modulation
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (std::size_t h = 0; h < H[d]; ++h)
		{
			IlpRow r12{join_name("eq12", {d + 1, h + 1}), 12, {}, RowSense::le, 1};
			IlpRow r14{join_name("eq14", {d + 1, h + 1}), 14, {}, RowSense::le, 0};
			for (std::size_t m = 0; m < n_dc; ++m)
			{
				if (m != d)
				{
					r14.terms.push_back({theta[{d, m, h}], 1});
				}
			}
			for (const auto& v : pv)
			{
				if (v.d == d && v.h == h)
				{
					r12.terms.push_back({v.y, 1});
					r14.terms.push_back({v.y, -p.kappa_gbps * modulation_level(*v.path, p.modulation)});
				}
			}
			model.add_row(std::move(r12));
			model.add_row(std::move(r14));
		}
	}
	// 15: congestion cap per candidate path
	const double guard_charge = sc.grid.guard_counts_toward_congestion() ? G : 0;
	for (std::size_t d = 0; d < n_dc; ++d)
	{
		for (std::size_t m = 0; m < n_dc; ++m)
		{
			if (m == d)
			{
				continue;
			}
			const auto& paths = sc.paths->between(d, m);
			for (std::size_t k = 0; k < paths.size(); ++k)
			{
				const double room = double(cap_slots - path_occupied_slots(sc.grid, paths[k]));
				IlpRow r{join_name("eq15", {d + 1, m + 1, k + 1}), 15, {}, RowSense::le, room};
				for (const auto& v : pv)
				{
					if (v.d == d && v.m == m && v.k == k)
					{
						r.terms.push_back({v.b, 1});
						if (guard_charge > 0)
						{
							r.terms.push_back({v.y, guard_charge});
						}
					}
				}
				model.add_row(std::move(r));
			}
		}
	}
	// 16, 17, 18: start slot, width and end position
	for (const auto& v : pv)
	{
		const std::initializer_list<std::size_t> id{v.d + 1, v.m + 1, v.k + 1, v.h + 1};
		const double room = ce * p.upsilon_max - path_occupied_slots(sc.grid, *v.path);
		model.add_row({join_name("eq16a", id), 16, {{v.f, 1}, {v.y, -1}}, RowSense::ge, 0});
		model.add_row({join_name("eq16b", id), 16, {{v.f, 1}, {v.y, -F}}, RowSense::le, 0});
		model.add_row({join_name("eq17", id), 17, {{v.b, 1}, {v.y, -F}}, RowSense::le, 0});
		model.add_row({join_name("eq18", id), 18, {{v.f, 1}, {v.b, 1}, {v.y, double(G)}}, RowSense::le, room + 1});
	}
	// 19..22: ordering and non-overlap of path variables sharing a link
	for (const auto& pr : pairs)
	{
		const auto& A = pv[pr.a];
		const auto& C = pv[pr.c];
		const std::string suffix = model.variables()[pr.delta].name.substr(2);
		model.add_row({"eq19" + suffix, 19, {{C.f, 1}, {A.f, -1}, {pr.delta, -F}}, RowSense::le, 0});
		model.add_row({"eq20" + suffix, 20, {{A.f, 1}, {C.f, -1}, {pr.delta, F}}, RowSense::le, F - 1});
		model.add_row({"eq21" + suffix, 21, {{A.f, 1}, {A.b, 1}, {A.y, double(G)}, {C.f, -1}, {pr.delta, F}}, RowSense::le, F});
		model.add_row({"eq22" + suffix, 22, {{C.f, 1}, {C.b, 1}, {C.y, double(G)}, {A.f, -1}, {pr.delta, -F}}, RowSense::le, 0});
	}
	return model;
}

// ---------------------------------------------------------------------------
// LP export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lp_number(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.12g", v);
	return buf;
}

inline void lp_terms(std::ostream& os, const IlpModel& model, const std::vector<IlpTerm>& terms)
{
	std::size_t on_line = 0;
	bool first = true;
	for (const auto& t : terms)
	{
		if (t.coef == 0)
		{
			continue;
		}
		if (on_line == 6)
		{
			os << "\n  ";
			on_line = 0;
		}
		const double mag = std::abs(t.coef);
		if (first)
		{
			os << (t.coef < 0 ? "- " : "");
		}
		else
		{
			os << (t.coef < 0 ? " - " : " + ");
		}
		if (mag != 1)
		{
			os << lp_number(mag) << ' ';
		}
		os << model.variables()[t.var].name;
		first = false;
		++on_line;
	}
	if (first)
	{
		os << "0 " << model.variables().front().name;
	}
}

} // namespace detail

/// Writes the model in CPLEX LP format; rows are grouped under `\ eqN` comments.
inline void export_lp(const IlpModel& model, std::ostream& os)
{
	os << "\\ greenmig migration-cycle model\n";
	os << "\\ variables: " << model.variables().size() << "  rows: " << model.rows().size() << "  big-M: " << detail::lp_number(model.big_m()) << "\n";
	os << "Minimize\n obj: ";
	detail::lp_terms(os, model, model.objective());
	os << "\nSubject To\n";
	int last_tag = -1;
	for (const auto& r : model.rows())
	{
		if (r.tag != last_tag)
		{
			os << "\\ eq" << r.tag << "\n";
			last_tag = r.tag;
		}
		os << " " << r.name << ": ";
		detail::lp_terms(os, model, r.terms);
		os << (r.sense == RowSense::le ? " <= " : r.sense == RowSense::ge ? " >= " : " = ") << detail::lp_number(r.rhs) << "\n";
	}
	os << "Bounds\n";
	for (const auto& v : model.variables())
	{
		if (v.type == VarType::binary)
		{
			continue;
		}
		if (v.upper)
		{
			os << " " << detail::lp_number(v.lower) << " <= " << v.name << " <= " << detail::lp_number(*v.upper) << "\n";
		}
		else
		{
			os << " " << v.name << " >= " << detail::lp_number(v.lower) << "\n";
		}
	}
	os << "Generals\n";
	for (const auto& v : model.variables())
	{
		if (v.type == VarType::integer)
		{
			os << " " << v.name << "\n";
		}
	}
	os << "Binaries\n";
	for (const auto& v : model.variables())
	{
		if (v.type == VarType::binary)
		{
			os << " " << v.name << "\n";
		}
	}
	os << "End\n";
}

inline std::string to_lp_string(const IlpModel& model)
{
	std::ostringstream os;
	export_lp(model, os);
	return os.str();
}

inline void write_lp_file(const IlpModel& model, const std::string& path)
{
	std::ofstream f(path, std::ios::binary);
	if (!f)
	{
		throw std::runtime_error("cannot open " + path + " for writing");
	}
	export_lp(model, f);
	f.flush();
	if (!f)
	{
		throw std::runtime_error("write to " + path + " failed");
	}
}

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

inline double row_activity(const IlpRow& r, const std::vector<double>& values)
{
	double s = 0;
	for (const auto& t : r.terms)
	{
		s += t.coef * values.at(t.var);
	}
	return s;
}

/// Names of rows, bounds and integrality requirements the assignment violates.
inline std::vector<std::string> ilp_violations(const IlpModel& model, const std::vector<double>& values, double tol = 1e-6)
{
	std::vector<std::string> out;
	if (values.size() != model.variables().size())
	{
		out.push_back("assignment size mismatch");
		return out;
	}
	for (std::size_t i = 0; i < values.size(); ++i)
	{
		const auto& v = model.variables()[i];
		const double ub = v.type == VarType::binary ? 1.0 : v.upper.value_or(std::numeric_limits<double>::infinity());
		if (values[i] < v.lower - tol || values[i] > ub + tol)
		{
			out.push_back("bound " + v.name);
		}
		if (v.type != VarType::continuous && std::abs(values[i] - std::round(values[i])) > tol)
		{
			out.push_back("integrality " + v.name);
		}
	}
	for (const auto& r : model.rows())
	{
		const double a = row_activity(r, values);
		const bool ok = r.sense == RowSense::le ? a <= r.rhs + tol : r.sense == RowSense::ge ? a >= r.rhs - tol : std::abs(a - r.rhs) <= tol;
		if (!ok)
		{
			out.push_back(r.name);
		}
	}
	return out;
}

inline double ilp_objective(const IlpModel& model, const std::vector<double>& values)
{
	double s = 0;
	for (const auto& t : model.objective())
	{
		s += t.coef * values.at(t.var);
	}
	return s;
}

/**
 * Maps an outcome onto the model's variables. Batches from one source take
 * batch indices in commit order; delta follows the start-slot order.
 */
inline std::vector<double> ilp_assignment(const IlpModel& model, const Scenario& sc, const Outcome& out)
{
	using detail::join_name;
	const auto& p = sc.params;
	std::vector<double> val(model.variables().size(), 0);
	auto set = [&](const std::string& name, double v) {
		auto id = model.find(name);
		if (!id)
		{
			throw std::invalid_argument("outcome does not fit the model: no variable " + name);
		}
		val[*id] = v;
	};
	std::vector<std::size_t> next_h(sc.dc_count(), 0);
	for (const auto& b : out.batches)
	{
		const std::size_t h = next_h[b.source_dc]++;
		const auto& cands = sc.paths->between(b.source_dc, b.dest_dc);
		const auto it = std::find(cands.begin(), cands.end(), b.path);
		if (it == cands.end())
		{
			throw std::invalid_argument("outcome uses a path outside the model");
		}
		const std::size_t k = std::size_t(it - cands.begin());
		const std::initializer_list<std::size_t> id{b.source_dc + 1, b.dest_dc + 1, k + 1, h + 1};
		set(join_name("y", id), 1);
		set(join_name("b", id), b.slots.width);
		set(join_name("f", id), b.slots.start);
		set(join_name("t", {b.source_dc + 1, b.dest_dc + 1, h + 1}), b.theta_gbps);
		for (VmId i : b.vms)
		{
			set(join_name("z", {b.source_dc + 1, i + 1}), 1);
		}
	}
	for (const auto& vm : sc.vms)
	{
		const std::size_t m = out.vm_dc[vm.id];
		const std::size_t n = out.vm_server[vm.id];
		if (m == vm.home_dc)
		{
			set(join_name("x", {m + 1, n + 1, vm.id + 1}), 1);
		}
		else
		{
			set(join_name("w", {m + 1, n + 1, vm.home_dc + 1, vm.id + 1}), 1);
		}
	}
	// delta: 1 iff the first path variable starts strictly earlier
	for (std::size_t i = 0; i < model.variables().size(); ++i)
	{
		const auto& v = model.variables()[i];
		if (v.family != "delta")
		{
			continue;
		}
		std::vector<std::size_t> idx;
		std::stringstream ss(v.name.substr(3));
		std::string part;
		while (std::getline(ss, part, '_'))
		{
			idx.push_back(std::stoul(part));
		}
		const double fa = val[*model.find(join_name("f", {idx[0], idx[1], idx[2], idx[3]}))];
		const double fc = val[*model.find(join_name("f", {idx[4], idx[5], idx[6], idx[7]}))];
		val[i] = fa < fc ? 1 : 0;
	}
	// Phi from the rebuilt datacenters
	for (std::size_t m = 0; m < sc.dc_count(); ++m)
	{
		int cores = 0;
		for (const auto& vm : sc.vms)
		{
			if (out.vm_dc[vm.id] == m)
			{
				cores += vm.cores;
			}
		}
		const double power = p.servers_per_dc * p.power.static_power() + p.dynamic_per_core() * cores;
		set(join_name("Phi", {m + 1}), std::max(power - sc.renewable[m], 0.0));
	}
	return val;
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

enum class SolveStatus
{
	optimal,
	not_solved
};

struct ExactLimits
{
	std::size_t max_nodes = 50'000'000;
	std::size_t max_dcs = 8;
	std::size_t max_requests = 24;
};

struct ExactSolution
{
	SolveStatus status = SolveStatus::not_solved;
	double objective = 0;
	double obj2 = 0;
	std::vector<MigrationBatch> batches;
	std::vector<std::size_t> vm_dc;
	std::vector<std::size_t> vm_server;
	std::size_t explored_nodes = 0;
	std::string message;

	bool optimal() const { return status == SolveStatus::optimal; }
	Outcome outcome() const { return Outcome{batches, vm_dc, vm_server, objective, obj2}; }
};

namespace detail {

/// Exact bin packing: server per item, or nullopt if the items need more than `bins` servers.
inline std::optional<std::vector<std::size_t>> pack_exact(const std::vector<int>& sizes, std::size_t bins, int capacity)
{
	std::vector<std::size_t> order(sizes.size());
	for (std::size_t i = 0; i < order.size(); ++i)
	{
		order[i] = i;
	}
	std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
	std::vector<int> load(bins, 0);
	std::vector<std::size_t> where(sizes.size(), 0);
	long long total = 0;
	for (int s : sizes)
	{
		total += s;
	}
	if (total > (long long)bins * capacity)
	{
		return std::nullopt;
	}
	std::size_t steps = 0;
	auto rec = [&](auto& self, std::size_t pos) -> bool {
		if (pos == order.size())
		{
			return true;
		}
		if (++steps > 2'000'000)
		{
			throw std::runtime_error("bin packing search limit exceeded");
		}
		const std::size_t item = order[pos];
		for (std::size_t b = 0; b < bins; ++b)
		{
			bool seen = false;
			for (std::size_t e = 0; e < b; ++e)
			{
				if (load[e] == load[b])
				{
					seen = true;
					break;
				}
			}
			if (seen || load[b] + sizes[item] > capacity)
			{
				continue;
			}
			load[b] += sizes[item];
			where[item] = b;
			if (self(self, pos + 1))
			{
				return true;
			}
			load[b] -= sizes[item];
			if (load[b] == 0)
			{
				break; // other empty servers are equivalent
			}
		}
		return false;
	};
	if (!rec(rec, 0))
	{
		return std::nullopt;
	}
	return where;
}

struct LocalBatch
{
	std::size_t dest = 0;
	double theta = 0;
	int cores = 0;
	std::vector<VmId> vms;
};

/// One way to split a datacenter's requests into stay / batches.
struct LocalPlan
{
	std::vector<LocalBatch> batches;
	int staying_cores = 0;
	double beta_cost = 0;
	double estimate = 0;
};

class ExactSearch
{
public:
	ExactSearch(const Scenario& sc, const ExactLimits& lim)
	: sc_(sc), p_(sc.params), lim_(lim), n_(sc.dc_count())
	{
		home_.resize(n_);
		for (const auto& v : sc.vms)
		{
			home_[v.home_dc].push_back(v.id);
		}
		static_w_ = p_.power.static_power();
		dyn_ = p_.dynamic_per_core();
		alpha_min_ = *std::min_element(sc.alpha.begin(), sc.alpha.end());
		for (std::size_t d = 0; d < n_; ++d)
		{
			std::vector<double> row(n_, 0);
			for (std::size_t m = 0; m < n_; ++m)
			{
				if (m != d)
				{
					for (const auto& path : sc.paths->between(d, m))
					{
						row[m] = std::max(row[m], p_.kappa_gbps * modulation_level(path, p_.modulation));
					}
				}
			}
			theta_cap_.push_back(row);
		}
	}

	ExactSolution run()
	{
		ExactSolution sol;
		if (n_ > lim_.max_dcs || sc_.vms.size() > lim_.max_requests)
		{
			sol.message = "instance exceeds the solver limits";
			return sol;
		}
		for (std::size_t d = 0; d < n_; ++d)
		{
			plans_.push_back(enumerate_plans(d));
		}
		// incumbent: nobody moves
		chosen_.assign(n_, 0);
		for (std::size_t d = 0; d < n_; ++d)
		{
			while (!plans_[d][chosen_[d]].batches.empty())
			{
				++chosen_[d];
			}
		}
		load_.assign(n_, 0);
		for (std::size_t d = 0; d < n_; ++d)
		{
			for (VmId i : home_[d])
			{
				load_[d] += sc_.vms[i].cores;
			}
		}
		if (!evaluate_leaf())
		{
			sol.message = "no-migration placement is infeasible";
			return sol;
		}
		load_.assign(n_, 0);
		flexible_cores_ = 0;
		for (const auto& v : sc_.vms)
		{
			flexible_cores_ += v.cores;
		}
		try
		{
			dfs(0, 0);
		}
		catch (const limit_reached&)
		{
			sol.explored_nodes = nodes_;
			sol.message = "node limit of " + std::to_string(lim_.max_nodes) + " reached";
			return sol;
		}
		sol = best_;
		sol.status = SolveStatus::optimal;
		sol.explored_nodes = nodes_;
		return sol;
	}

private:
	struct limit_reached
	{
	};

	void tick()
	{
		if (++nodes_ > lim_.max_nodes)
		{
			throw limit_reached{};
		}
	}

	std::vector<LocalPlan> enumerate_plans(std::size_t d)
	{
		const auto& reqs = home_[d];
		const std::size_t hcap = batch_slots(sc_, reqs.size());
		std::vector<LocalPlan> out;
		LocalPlan cur;
		auto rec = [&](auto& self, std::size_t pos) -> void {
			if (pos == reqs.size())
			{
				out.push_back(cur);
				return;
			}
			const auto& v = sc_.vms[reqs[pos]];
			cur.staying_cores += v.cores;
			self(self, pos + 1);
			cur.staying_cores -= v.cores;
			for (auto& b : cur.batches)
			{
				if (b.theta + v.bandwidth_gbps <= theta_cap_[d][b.dest] + 1e-9)
				{
					b.theta += v.bandwidth_gbps;
					b.cores += v.cores;
					b.vms.push_back(v.id);
					self(self, pos + 1);
					b.vms.pop_back();
					b.cores -= v.cores;
					b.theta -= v.bandwidth_gbps;
				}
			}
			if (cur.batches.size() < hcap)
			{
				for (std::size_t m = 0; m < n_; ++m)
				{
					if (m == d || v.bandwidth_gbps > theta_cap_[d][m] + 1e-9)
					{
						continue;
					}
					cur.batches.push_back({m, v.bandwidth_gbps, v.cores, {v.id}});
					self(self, pos + 1);
					cur.batches.pop_back();
				}
			}
		};
		rec(rec, 0);
		// order: most promising first, judged in isolation against the no-migration state
		std::vector<int> base(n_, 0);
		for (std::size_t m = 0; m < n_; ++m)
		{
			for (VmId i : home_[m])
			{
				base[m] += sc_.vms[i].cores;
			}
		}
		for (auto& plan : out)
		{
			std::vector<int> after = base;
			for (const auto& b : plan.batches)
			{
				after[d] -= b.cores;
				after[b.dest] += b.cores;
				plan.beta_cost += sc_.beta[d] * (b.theta + 1);
			}
			double delta = plan.beta_cost;
			for (std::size_t m = 0; m < n_; ++m)
			{
				if (after[m] != base[m])
				{
					delta += sc_.alpha[m] * (brown_of(m, after[m]) - brown_of(m, base[m]));
				}
			}
			plan.estimate = delta;
		}
		std::stable_sort(out.begin(), out.end(), [](const LocalPlan& a, const LocalPlan& b) { return a.estimate < b.estimate; });
		return out;
	}

	double static_of(int cores) const
	{
		if (p_.static_mode == StaticPowerMode::all_servers)
		{
			return p_.servers_per_dc * static_w_;
		}
		return std::ceil(double(cores) / p_.cores_per_server - 1e-12) * static_w_;
	}

	double brown_of(std::size_t m, int cores) const
	{
		return std::max(static_of(cores) + dyn_ * cores - sc_.renewable[m], 0.0);
	}

	double lower_bound(double beta_acc) const
	{
		double lb = beta_acc;
		double free_w = 0;
		for (std::size_t m = 0; m < n_; ++m)
		{
			const double power = static_of(load_[m]) + dyn_ * load_[m];
			lb += sc_.alpha[m] * std::max(power - sc_.renewable[m], 0.0);
			free_w += std::max(sc_.renewable[m] - power, 0.0);
		}
		lb += alpha_min_ * std::max(dyn_ * flexible_cores_ - free_w, 0.0);
		return lb;
	}

	void dfs(std::size_t d, double beta_acc)
	{
		tick();
		if (d == n_)
		{
			if (beta_acc + brown_total() < best_obj_ - 1e-9)
			{
				evaluate_leaf();
			}
			return;
		}
		const int capacity = p_.servers_per_dc * p_.cores_per_server;
		int home_cores = 0;
		for (VmId i : home_[d])
		{
			home_cores += sc_.vms[i].cores;
		}
		flexible_cores_ -= home_cores;
		for (std::size_t k = 0; k < plans_[d].size(); ++k)
		{
			const auto& plan = plans_[d][k];
			load_[d] += plan.staying_cores;
			for (const auto& b : plan.batches)
			{
				load_[b.dest] += b.cores;
			}
			bool fits = true;
			for (std::size_t m = 0; m < n_; ++m)
			{
				fits = fits && load_[m] <= capacity;
			}
			if (fits && lower_bound(beta_acc + plan.beta_cost) < best_obj_ - 1e-9)
			{
				chosen_[d] = k;
				dfs(d + 1, beta_acc + plan.beta_cost);
			}
			load_[d] -= plan.staying_cores;
			for (const auto& b : plan.batches)
			{
				load_[b.dest] -= b.cores;
			}
		}
		flexible_cores_ += home_cores;
	}

	double brown_total() const
	{
		double s = 0;
		for (std::size_t m = 0; m < n_; ++m)
		{
			s += sc_.alpha[m] * brown_of(m, load_[m]);
		}
		return s;
	}

	/// Full check of the current complete choice; records it if it beats the incumbent.
	bool evaluate_leaf()
	{
		// VMs per datacenter, then exact packing
		std::vector<std::vector<VmId>> at(n_);
		std::vector<const LocalBatch*> batches;
		std::vector<std::size_t> batch_src;
		double beta = 0;
		for (std::size_t d = 0; d < n_; ++d)
		{
			const auto& plan = plans_[d][chosen_[d]];
			std::vector<bool> moving(sc_.vms.size(), false);
			for (const auto& b : plan.batches)
			{
				batches.push_back(&b);
				batch_src.push_back(d);
				for (VmId i : b.vms)
				{
					moving[i] = true;
					at[b.dest].push_back(i);
				}
			}
			for (VmId i : home_[d])
			{
				if (!moving[i])
				{
					at[d].push_back(i);
				}
			}
			beta += plan.beta_cost;
		}
		std::vector<std::size_t> vm_dc(sc_.vms.size()), vm_server(sc_.vms.size());
		double obj2 = 0;
		for (std::size_t m = 0; m < n_; ++m)
		{
			std::vector<int> sizes;
			int cores = 0;
			for (VmId i : at[m])
			{
				sizes.push_back(sc_.vms[i].cores);
				cores += sc_.vms[i].cores;
			}
			std::size_t bins = std::size_t(p_.servers_per_dc);
			if (p_.static_mode == StaticPowerMode::active_servers)
			{
				bins = std::size_t(std::ceil(double(cores) / p_.cores_per_server - 1e-12));
			}
			std::optional<std::vector<std::size_t>> where;
			for (; bins <= std::size_t(p_.servers_per_dc) && !where; ++bins)
			{
				where = pack_exact(sizes, bins, p_.cores_per_server);
			}
			if (!where)
			{
				return false;
			}
			const double static_w = p_.static_mode == StaticPowerMode::all_servers ? p_.servers_per_dc * static_w_ : double(bins - 1) * static_w_;
			obj2 += sc_.alpha[m] * std::max(static_w + dyn_ * cores - sc_.renewable[m], 0.0);
			for (std::size_t j = 0; j < at[m].size(); ++j)
			{
				vm_dc[at[m][j]] = m;
				vm_server[at[m][j]] = (*where)[j];
			}
		}
		const double obj = obj2 + beta;
		if (has_best_ && !(obj < best_obj_ - 1e-9))
		{
			return false;
		}
		std::vector<MigrationBatch> routed;
		if (!route(batches, batch_src, routed))
		{
			return false;
		}
		best_ = ExactSolution{};
		best_.objective = obj;
		best_.obj2 = obj2;
		best_.batches = std::move(routed);
		best_.vm_dc = std::move(vm_dc);
		best_.vm_server = std::move(vm_server);
		best_obj_ = obj;
		has_best_ = true;
		return true;
	}

	/// Searches batch orders and path choices for a sequential first-fit assignment.
	bool route(const std::vector<const LocalBatch*>& batches, const std::vector<std::size_t>& src, std::vector<MigrationBatch>& out)
	{
		SpectrumGrid grid = sc_.grid;
		std::vector<bool> used(batches.size(), false);
		out.clear();
		auto rec = [&](auto& self) -> bool {
			if (out.size() == batches.size())
			{
				return true;
			}
			for (std::size_t i = 0; i < batches.size(); ++i)
			{
				if (used[i])
				{
					continue;
				}
				const auto& b = *batches[i];
				for (const auto& path : sc_.paths->between(src[i], b.dest))
				{
					tick();
					const int level = modulation_level(path, p_.modulation);
					if (b.theta > p_.kappa_gbps * level + 1e-9)
					{
						continue;
					}
					const int width = slots_for_bandwidth(b.theta, level, p_.slot_rate_gbps);
					auto r = first_fit_allocate(grid, path, width, p_.guard_slots, p_.upsilon_max);
					if (!r)
					{
						continue;
					}
					MigrationBatch mb;
					mb.index = out.size() + 1;
					mb.source_dc = src[i];
					mb.dest_dc = b.dest;
					mb.vms = b.vms;
					std::sort(mb.vms.begin(), mb.vms.end());
					mb.theta_gbps = b.theta;
					mb.path = path;
					mb.modulation_level = level;
					mb.slots = *r;
					out.push_back(std::move(mb));
					used[i] = true;
					if (self(self))
					{
						return true;
					}
					used[i] = false;
					out.pop_back();
					release(grid, path, *r);
				}
			}
			return false;
		};
		return rec(rec);
	}

	const Scenario& sc_;
	const SimulationParams& p_;
	ExactLimits lim_;
	std::size_t n_;
	std::vector<std::vector<VmId>> home_;
	std::vector<std::vector<double>> theta_cap_;
	std::vector<std::vector<LocalPlan>> plans_;
	std::vector<std::size_t> chosen_;
	std::vector<int> load_;
	int flexible_cores_ = 0;
	double static_w_ = 0, dyn_ = 0, alpha_min_ = 0;
	std::size_t nodes_ = 0;
	ExactSolution best_;
	double best_obj_ = std::numeric_limits<double>::infinity();
	bool has_best_ = false;
};

} // namespace detail

/**
 * Provably optimal migration plan for a tiny scenario, or a not_solved
 * result when the instance or the search exceeds the limits.
 */
inline ExactSolution solve_exact(const Scenario& sc, const ExactLimits& limits = {})
{
	return detail::ExactSearch(sc, limits).run();
}

} // namespace greenmig

#endif // GREENMIG_EXACT_HPP
