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
 * \file greenmig/topology.hpp
 *
 * \brief Inter-datacenter optical network graph and path computation.
 *
 * Nodes are dense indices in the order they were declared. Links are
 * undirected and every link carries the same number of spectrum slots.
 * Path enumeration is deterministic: paths are totally ordered by
 * (length, hop count, node sequence).
 */

#ifndef GREENMIG_TOPOLOGY_HPP
#define GREENMIG_TOPOLOGY_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace greenmig {

using NodeId = std::size_t;
using LinkId = std::size_t;

struct Link
{
	NodeId u = 0;
	NodeId v = 0;
	double length_km = 0;

	NodeId other(NodeId n) const { return n == u ? v : u; }
};

struct Path
{
	std::vector<NodeId> nodes;
	std::vector<LinkId> links;
	double length_km = 0;

	std::size_t hops() const { return links.size(); }
	NodeId source() const { return nodes.front(); }
	NodeId target() const { return nodes.back(); }
	bool empty() const { return nodes.empty(); }

	friend bool operator==(const Path&, const Path&) = default;
};

/// Strict weak order used everywhere paths are ranked.
inline bool path_less(const Path& a, const Path& b)
{
	if (a.length_km != b.length_km)
	{
		return a.length_km < b.length_km;
	}
	if (a.hops() != b.hops())
	{
		return a.hops() < b.hops();
	}
	return a.nodes < b.nodes;
}

class topology_error: public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

class Topology
{
public:
	Topology() = default;

	/**
	 * Validates and builds the graph.
	 *
	 * Throws topology_error on self-loops, duplicate links, unknown node
	 * references, non-positive lengths or capacities, or a disconnected
	 * graph.
	 */
	Topology(std::vector<std::string> names,
	         std::vector<Link> links,
	         int slot_capacity,
	         std::vector<NodeId> dc_nodes)
	: names_(std::move(names)),
	  links_(std::move(links)),
	  slot_capacity_(slot_capacity),
	  dc_nodes_(std::move(dc_nodes))
	{
		validate();
	}

	std::size_t node_count() const { return names_.size(); }
	std::size_t link_count() const { return links_.size(); }
	const std::vector<Link>& links() const { return links_; }
	const Link& link(LinkId id) const { return links_.at(id); }
	int slot_capacity() const { return slot_capacity_; }
	const std::vector<NodeId>& dc_nodes() const { return dc_nodes_; }
	const std::string& name(NodeId n) const { return names_.at(n); }
	const std::vector<std::string>& names() const { return names_; }

	/// Adjacent (neighbor, link) pairs sorted by neighbor index.
	const std::vector<std::pair<NodeId, LinkId>>& adjacent(NodeId n) const { return adjacency_.at(n); }

	std::optional<LinkId> link_between(NodeId a, NodeId b) const
	{
		for (const auto& [nb, id] : adjacency_.at(a))
		{
			if (nb == b)
			{
				return id;
			}
		}
		return std::nullopt;
	}

	std::optional<NodeId> find_node(std::string_view name) const
	{
		for (std::size_t i = 0; i < names_.size(); ++i)
		{
			if (names_[i] == name)
			{
				return i;
			}
		}
		return std::nullopt;
	}

	std::string link_name(LinkId id) const
	{
		const auto& l = links_.at(id);
		return names_[l.u] + "-" + names_[l.v];
	}

	/// Builds a Path from a node sequence; throws if consecutive nodes are not adjacent.
	Path make_path(const std::vector<NodeId>& nodes) const
	{
		if (nodes.empty())
		{
			throw topology_error("empty node sequence");
		}
		Path p;
		p.nodes = nodes;
		for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
		{
			auto id = link_between(nodes[i], nodes[i + 1]);
			if (!id)
			{
				throw topology_error("nodes " + names_.at(nodes[i]) + " and " + names_.at(nodes[i + 1]) + " are not adjacent");
			}
			p.links.push_back(*id);
			p.length_km += links_[*id].length_km;
		}
		return p;
	}

private:
	void validate()
	{
		if (names_.empty())
		{
			throw topology_error("topology has no nodes");
		}
		if (slot_capacity_ <= 0)
		{
			throw topology_error("slot capacity must be positive");
		}
		std::set<std::string> seen_names(names_.begin(), names_.end());
		if (seen_names.size() != names_.size())
		{
			throw topology_error("duplicate node name");
		}
		adjacency_.assign(names_.size(), {});
		std::set<std::pair<NodeId, NodeId>> seen;
		for (std::size_t i = 0; i < links_.size(); ++i)
		{
			auto& l = links_[i];
			if (l.u >= names_.size() || l.v >= names_.size())
			{
				throw topology_error("link references unknown node");
			}
			if (l.u == l.v)
			{
				throw topology_error("self-loop at node " + names_[l.u]);
			}
			if (!(l.length_km > 0))
			{
				throw topology_error("link length must be positive");
			}
			if (l.u > l.v)
			{
				std::swap(l.u, l.v);
			}
			if (!seen.insert({l.u, l.v}).second)
			{
				throw topology_error("duplicate link " + names_[l.u] + "-" + names_[l.v]);
			}
			adjacency_[l.u].emplace_back(l.v, i);
			adjacency_[l.v].emplace_back(l.u, i);
		}
		for (auto& adj : adjacency_)
		{
			std::sort(adj.begin(), adj.end());
		}
		std::set<NodeId> dcs;
		for (NodeId d : dc_nodes_)
		{
			if (d >= names_.size())
			{
				throw topology_error("datacenter references unknown node");
			}
			if (!dcs.insert(d).second)
			{
				throw topology_error("duplicate datacenter node " + names_[d]);
			}
		}
		// connectivity
		std::vector<bool> reached(names_.size(), false);
		std::vector<NodeId> stack{0};
		reached[0] = true;
		std::size_t count = 1;
		while (!stack.empty())
		{
			NodeId n = stack.back();
			stack.pop_back();
			for (const auto& [nb, id] : adjacency_[n])
			{
				if (!reached[nb])
				{
					reached[nb] = true;
					++count;
					stack.push_back(nb);
				}
			}
		}
		if (count != names_.size())
		{
			throw topology_error("topology is disconnected");
		}
	}

	std::vector<std::string> names_;
	std::vector<Link> links_;
	int slot_capacity_ = 0;
	std::vector<NodeId> dc_nodes_;
	std::vector<std::vector<std::pair<NodeId, LinkId>>> adjacency_;
};

/// Name-based topology description, as read from preset files.
struct TopologyDescription
{
	struct LinkSpec
	{
		std::string u;
		std::string v;
		double length_km = 0;
	};

	std::vector<std::string> nodes;
	std::vector<LinkSpec> links;
	int slot_capacity = 300;
	std::vector<std::string> dc_nodes;
};

inline Topology load_topology(const TopologyDescription& desc)
{
	std::map<std::string, NodeId> index;
	for (std::size_t i = 0; i < desc.nodes.size(); ++i)
	{
		index.emplace(desc.nodes[i], i);
	}
	auto lookup = [&](const std::string& n) {
		auto it = index.find(n);
		if (it == index.end())
		{
			throw topology_error("unknown node reference '" + n + "'");
		}
		return it->second;
	};
	std::vector<Link> links;
	for (const auto& l : desc.links)
	{
		links.push_back(Link{lookup(l.u), lookup(l.v), l.length_km});
	}
	std::vector<NodeId> dcs;
	for (const auto& d : desc.dc_nodes)
	{
		dcs.push_back(lookup(d));
	}
	return Topology(desc.nodes, std::move(links), desc.slot_capacity, std::move(dcs));
}

namespace detail {

inline std::string json_node_name(const nlohmann::json& j)
{
	if (j.is_string())
	{
		return j.get<std::string>();
	}
	if (j.is_number_integer())
	{
		return std::to_string(j.get<long long>());
	}
	throw topology_error("node identifiers must be strings or integers");
}

} // namespace detail

/**
 * Parses the preset file format:
 *
 *   { "nodes": [1, 2, ...],
 *     "links": [[u, v, length_km], ...],
 *     "slot_capacity": 300,
 *     "dc_nodes": [1, 2, ...] }
 *
 * "dc_nodes" defaults to every node.
 */
inline TopologyDescription parse_topology(const nlohmann::json& j)
{
	TopologyDescription desc;
	try
	{
		for (const auto& n : j.at("nodes"))
		{
			desc.nodes.push_back(detail::json_node_name(n));
		}
		for (const auto& l : j.at("links"))
		{
			if (!l.is_array() || l.size() != 3)
			{
				throw topology_error("each link must be [u, v, length_km]");
			}
			desc.links.push_back({detail::json_node_name(l[0]), detail::json_node_name(l[1]), l[2].get<double>()});
		}
		desc.slot_capacity = j.value("slot_capacity", 300);
		if (j.contains("dc_nodes"))
		{
			for (const auto& n : j.at("dc_nodes"))
			{
				desc.dc_nodes.push_back(detail::json_node_name(n));
			}
		}
		else
		{
			desc.dc_nodes = desc.nodes;
		}
	}
	catch (const nlohmann::json::exception& e)
	{
		throw topology_error(std::string("malformed topology description: ") + e.what());
	}
	return desc;
}

inline TopologyDescription read_topology_file(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
	{
		throw topology_error("cannot open topology file '" + path + "'");
	}
	nlohmann::json j;
	try
	{
		in >> j;
	}
	catch (const nlohmann::json::exception& e)
	{
		throw topology_error("cannot parse topology file '" + path + "': " + e.what());
	}
	return parse_topology(j);
}

/**
 * Six-node inter-DC network: a ring 1..6 with chords 1-4 and 2-5, every link
 * 1200 km. The chord set is a reconstruction, not published data.
 */
inline TopologyDescription six_node_description(int slot_capacity = 300)
{
	TopologyDescription d;
	d.nodes = {"1", "2", "3", "4", "5", "6"};
	for (auto [u, v] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 1}, {1, 4}, {2, 5}})
	{
		d.links.push_back({std::to_string(u), std::to_string(v), 1200.0});
	}
	d.slot_capacity = slot_capacity;
	d.dc_nodes = d.nodes;
	return d;
}

/// 14-node, 21-link NSFNET with the usual distance table (km).
inline TopologyDescription nsfnet_description(int slot_capacity = 300)
{
	static const int table[21][3] = {
		{1, 2, 2100},  {1, 3, 3000},  {1, 8, 4800},   {2, 3, 1200},  {2, 4, 1500},  {3, 6, 3600},  {4, 5, 1200},
		{4, 11, 3900}, {5, 6, 2400},  {5, 7, 1200},   {6, 10, 2100}, {6, 14, 3600}, {7, 8, 1500},  {8, 9, 1500},
		{9, 10, 1500}, {9, 12, 600},  {9, 13, 600},   {11, 12, 1200}, {11, 13, 1500}, {12, 14, 600}, {13, 14, 300},
	};
	TopologyDescription d;
	for (int i = 1; i <= 14; ++i)
	{
		d.nodes.push_back(std::to_string(i));
	}
	for (const auto& row : table)
	{
		d.links.push_back({std::to_string(row[0]), std::to_string(row[1]), double(row[2])});
	}
	d.slot_capacity = slot_capacity;
	d.dc_nodes = d.nodes;
	return d;
}

/// "six-node", "nsfnet", or a path to a topology file.
inline TopologyDescription topology_description(const std::string& name_or_path, std::optional<int> slot_capacity = std::nullopt)
{
	TopologyDescription d;
	if (name_or_path == "six-node")
	{
		d = six_node_description();
	}
	else if (name_or_path == "nsfnet")
	{
		d = nsfnet_description();
	}
	else
	{
		d = read_topology_file(name_or_path);
	}
	if (slot_capacity)
	{
		d.slot_capacity = *slot_capacity;
	}
	return d;
}

// ---------------------------------------------------------------------------
// Shortest paths
// ---------------------------------------------------------------------------

namespace detail {

/**
 * Dijkstra over the composite label (length, hops, node sequence), skipping
 * banned nodes and links. Labels extend monotonically, so the label-setting
 * loop returns the minimum path in path_less order.
 */
inline std::optional<Path> best_path(const Topology& t,
                                     NodeId s,
                                     NodeId d,
                                     const std::vector<bool>& banned_nodes,
                                     const std::set<LinkId>& banned_links)
{
	const std::size_t n = t.node_count();
	std::vector<std::optional<Path>> label(n);
	std::vector<bool> settled(n, false);
	auto cmp = [](const std::pair<Path, NodeId>& a, const std::pair<Path, NodeId>& b) { return path_less(b.first, a.first); };
	std::priority_queue<std::pair<Path, NodeId>, std::vector<std::pair<Path, NodeId>>, decltype(cmp)> queue(cmp);

	Path start;
	start.nodes = {s};
	label[s] = start;
	queue.emplace(start, s);
	while (!queue.empty())
	{
		auto [p, u] = queue.top();
		queue.pop();
		if (settled[u] || !(p == *label[u]))
		{
			continue;
		}
		settled[u] = true;
		if (u == d)
		{
			return p;
		}
		for (const auto& [v, id] : t.adjacent(u))
		{
			if (settled[v] || banned_nodes[v] || banned_links.count(id))
			{
				continue;
			}
			Path q = p;
			q.nodes.push_back(v);
			q.links.push_back(id);
			q.length_km += t.link(id).length_km;
			if (!label[v] || path_less(q, *label[v]))
			{
				label[v] = q;
				queue.emplace(std::move(q), v);
			}
		}
	}
	return std::nullopt;
}

} // namespace detail

inline std::optional<Path> shortest_path(const Topology& t, NodeId s, NodeId d)
{
	return detail::best_path(t, s, d, std::vector<bool>(t.node_count(), false), {});
}

/**
 * Yen's algorithm. Returns up to k loop-free paths from s to d in path_less
 * order; the result for k is always a prefix of the result for k + 1.
 */
inline std::vector<Path> k_shortest_paths(const Topology& t, NodeId s, NodeId d, std::size_t k)
{
	if (s >= t.node_count() || d >= t.node_count())
	{
		throw topology_error("k_shortest_paths: unknown node");
	}
	if (s == d)
	{
		throw topology_error("k_shortest_paths: source equals destination");
	}
	std::vector<Path> result;
	if (k == 0)
	{
		return result;
	}
	auto first = shortest_path(t, s, d);
	if (!first)
	{
		return result;
	}
	result.push_back(*first);

	auto set_cmp = [](const Path& a, const Path& b) { return path_less(a, b); };
	std::set<Path, decltype(set_cmp)> candidates(set_cmp);

	while (result.size() < k)
	{
		const Path& last = result.back();
		for (std::size_t i = 0; i + 1 < last.nodes.size(); ++i)
		{
			NodeId spur = last.nodes[i];
			std::vector<NodeId> root(last.nodes.begin(), last.nodes.begin() + i + 1);

			std::set<LinkId> banned_links;
			for (const auto& p : result)
			{
				if (p.nodes.size() > i && std::equal(root.begin(), root.end(), p.nodes.begin()))
				{
					banned_links.insert(p.links[i]);
				}
			}
			std::vector<bool> banned_nodes(t.node_count(), false);
			for (std::size_t j = 0; j < i; ++j)
			{
				banned_nodes[root[j]] = true;
			}
			auto spur_path = detail::best_path(t, spur, d, banned_nodes, banned_links);
			if (!spur_path)
			{
				continue;
			}
			std::vector<NodeId> nodes = root;
			nodes.insert(nodes.end(), spur_path->nodes.begin() + 1, spur_path->nodes.end());
			Path total = t.make_path(nodes);
			if (std::find(result.begin(), result.end(), total) == result.end())
			{
				candidates.insert(std::move(total));
			}
		}
		if (candidates.empty())
		{
			break;
		}
		result.push_back(*candidates.begin());
		candidates.erase(candidates.begin());
	}
	return result;
}

/// True iff the two paths have at least one link in common.
inline bool paths_share_link(const Path& a, const Path& b)
{
	for (LinkId l : a.links)
	{
		if (std::find(b.links.begin(), b.links.end(), l) != b.links.end())
		{
			return true;
		}
	}
	return false;
}

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

/**
 * Distance-to-modulation-level table. Entries are (max_km, level) with
 * ascending max_km and non-increasing level; paths longer than every
 * threshold get level 1 (BPSK). The empty table maps everything to 1.
 */
class ModulationTable
{
public:
	ModulationTable() = default;

	explicit ModulationTable(std::vector<std::pair<double, int>> entries)
	: entries_(std::move(entries))
	{
		int prev_level = 4;
		double prev_km = 0;
		for (const auto& [km, level] : entries_)
		{
			if (level < 1 || level > 4)
			{
				throw std::invalid_argument("modulation level must be in [1, 4]");
			}
			if (!(km > prev_km))
			{
				throw std::invalid_argument("modulation thresholds must be positive and strictly ascending");
			}
			if (level > prev_level)
			{
				throw std::invalid_argument("modulation level must not increase with distance");
			}
			prev_level = level;
			prev_km = km;
		}
	}

	int level(double length_km) const
	{
		for (const auto& [km, level] : entries_)
		{
			if (length_km <= km)
			{
				return level;
			}
		}
		return 1;
	}

	const std::vector<std::pair<double, int>>& entries() const { return entries_; }

private:
	std::vector<std::pair<double, int>> entries_;
};

inline int modulation_level(const Path& p, const ModulationTable& table)
{
	return table.level(p.length_km);
}

/**
 * K-shortest path sets for every ordered pair of datacenters, computed once
 * and shared read-only between simulation runs.
 */
class PathTable
{
public:
	PathTable() = default;

	PathTable(const Topology& t, std::size_t k)
	: dc_count_(t.dc_nodes().size()), k_(k)
	{
		paths_.resize(dc_count_ * dc_count_);
		for (std::size_t a = 0; a < dc_count_; ++a)
		{
			for (std::size_t b = 0; b < dc_count_; ++b)
			{
				if (a != b)
				{
					paths_[a * dc_count_ + b] = k_shortest_paths(t, t.dc_nodes()[a], t.dc_nodes()[b], k);
				}
			}
		}
	}

	/// Paths between datacenter indices (not node ids).
	const std::vector<Path>& between(std::size_t src_dc, std::size_t dst_dc) const
	{
		return paths_.at(src_dc * dc_count_ + dst_dc);
	}

	std::size_t k() const { return k_; }
	std::size_t dc_count() const { return dc_count_; }

private:
	std::size_t dc_count_ = 0;
	std::size_t k_ = 0;
	std::vector<std::vector<Path>> paths_;
};

} // namespace greenmig

#endif // GREENMIG_TOPOLOGY_HPP
