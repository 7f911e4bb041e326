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
 * \file greenmig/spectrum.hpp
 *
 * \brief Per-link frequency-slot bookkeeping and routing-and-spectrum
 *  assignment feasibility.
 *
 * Slots are numbered 1..capacity. An allocation occupies a payload run
 * followed by its guard slots, at the same indices on every link of its
 * path. Because every payload is trailed by exclusively owned guard slots,
 * two payloads sharing a link are always at least `guard` slots apart.
 */

#ifndef GREENMIG_SPECTRUM_HPP
#define GREENMIG_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <greenmig/topology.hpp>

namespace greenmig {

struct SlotRange
{
	int start = 0;  // 1-based
	int width = 0;  // payload slots
	int guard = 0;

	int end() const { return start + width + guard - 1; } // last occupied slot, guard included
	int span() const { return width + guard; }

	friend bool operator==(const SlotRange&, const SlotRange&) = default;
};

/// Slots needed to carry `gbps` at modulation level `level` over slots of `slot_rate_gbps`.
inline int slots_for_bandwidth(double gbps, int level, double slot_rate_gbps)
{
	if (!(gbps > 0) || level < 1 || !(slot_rate_gbps > 0))
	{
		throw std::invalid_argument("slots_for_bandwidth: inputs must be positive");
	}
	const double exact = gbps / (level * slot_rate_gbps);
	return std::max(1, int(std::ceil(exact - 1e-9)));
}

class SpectrumGrid
{
public:
	SpectrumGrid() = default;

	SpectrumGrid(std::size_t link_count, int slot_capacity, double slot_rate_gbps = 12.5)
	: capacity_(slot_capacity),
	  slot_rate_gbps_(slot_rate_gbps),
	  occupied_(link_count, std::vector<char>(std::size_t(slot_capacity), 0))
	{
		if (slot_capacity <= 0)
		{
			throw std::invalid_argument("slot capacity must be positive");
		}
	}

	explicit SpectrumGrid(const Topology& t, double slot_rate_gbps = 12.5)
	: SpectrumGrid(t.link_count(), t.slot_capacity(), slot_rate_gbps)
	{
	}

	int capacity() const { return capacity_; }
	double slot_rate_gbps() const { return slot_rate_gbps_; }
	std::size_t link_count() const { return occupied_.size(); }

	/// Whether guard slots count toward the congestion ratio (default) or only payload.
	bool guard_counts_toward_congestion() const { return guard_counts_; }
	void set_guard_counts_toward_congestion(bool v) { guard_counts_ = v; }

	bool occupied(LinkId link, int slot) const { return occupied_.at(link).at(std::size_t(slot - 1)) != 0; }

	int used_slots(LinkId link) const
	{
		const auto& v = occupied_.at(link);
		return int(std::count(v.begin(), v.end(), char(1)));
	}

	bool range_free(const Path& p, int first, int last) const
	{
		if (first < 1 || last > capacity_)
		{
			return false;
		}
		for (LinkId l : p.links)
		{
			const auto& v = occupied_[l];
			for (int s = first; s <= last; ++s)
			{
				if (v[std::size_t(s - 1)])
				{
					return false;
				}
			}
		}
		return true;
	}

	/// Marks a range on every link of p. Throws if any slot is taken or out of bounds.
	void occupy(const Path& p, const SlotRange& r)
	{
		if (r.start < 1 || r.width < 1 || r.guard < 0 || r.end() > capacity_)
		{
			throw std::out_of_range("slot range outside the grid");
		}
		if (!range_free(p, r.start, r.end()))
		{
			throw std::logic_error("slot range already occupied");
		}
		set(p, r, 1);
	}

	/// Frees a range on every link of p. Throws if the range is not fully occupied.
	void release(const Path& p, const SlotRange& r)
	{
		if (r.start < 1 || r.width < 1 || r.guard < 0 || r.end() > capacity_)
		{
			throw std::out_of_range("slot range outside the grid");
		}
		for (LinkId l : p.links)
		{
			for (int s = r.start; s <= r.end(); ++s)
			{
				if (!occupied_[l][std::size_t(s - 1)])
				{
					throw std::logic_error("releasing a slot that is not allocated");
				}
			}
		}
		set(p, r, 0);
	}

	friend bool operator==(const SpectrumGrid&, const SpectrumGrid&) = default;

private:
	void set(const Path& p, const SlotRange& r, char value)
	{
		for (LinkId l : p.links)
		{
			for (int s = r.start; s <= r.end(); ++s)
			{
				occupied_[l][std::size_t(s - 1)] = value;
			}
		}
	}

	int capacity_ = 0;
	double slot_rate_gbps_ = 12.5;
	bool guard_counts_ = true;
	std::vector<std::vector<char>> occupied_;
};

/// Number of slots occupied on at least one link of p.
inline int path_occupied_slots(const SpectrumGrid& g, const Path& p)
{
	int count = 0;
	for (int s = 1; s <= g.capacity(); ++s)
	{
		for (LinkId l : p.links)
		{
			if (g.occupied(l, s))
			{
				++count;
				break;
			}
		}
	}
	return count;
}

/// Fraction of the spectrum unusable along p (union over its links).
inline double path_occupancy_ratio(const SpectrumGrid& g, const Path& p)
{
	return double(path_occupied_slots(g, p)) / g.capacity();
}

/// Largest slot count a path may hold under the cap, i.e. floor(umax * capacity).
inline int congestion_limit_slots(const SpectrumGrid& g, double upsilon_max)
{
	return int(std::floor(upsilon_max * g.capacity() + 1e-9));
}

inline bool congestion_feasible(const SpectrumGrid& g, const Path& p, int additional_slots, double upsilon_max)
{
	if (additional_slots < 0)
	{
		throw std::invalid_argument("additional_slots must be non-negative");
	}
	return path_occupied_slots(g, p) + additional_slots <= congestion_limit_slots(g, upsilon_max);
}

/**
 * First-fit allocation of `width` payload slots plus `guard` guard slots
 * along p. Returns the lowest feasible start, or nullopt (blocked) leaving
 * the grid untouched.
 */
inline std::optional<SlotRange> first_fit_allocate(SpectrumGrid& g, const Path& p, int width, int guard, double upsilon_max)
{
	if (width < 1 || guard < 0)
	{
		throw std::invalid_argument("first_fit_allocate: width must be >= 1 and guard >= 0");
	}
	if (!(upsilon_max > 0) || upsilon_max > 1)
	{
		throw std::invalid_argument("first_fit_allocate: upsilon_max must be in (0, 1]");
	}
	const int charged = g.guard_counts_toward_congestion() ? width + guard : width;
	if (!congestion_feasible(g, p, charged, upsilon_max))
	{
		return std::nullopt;
	}
	const int span = width + guard;
	for (int start = 1; start + span - 1 <= g.capacity(); ++start)
	{
		if (g.range_free(p, start, start + span - 1))
		{
			SlotRange r{start, width, guard};
			g.occupy(p, r);
			return r;
		}
	}
	return std::nullopt;
}

inline void release(SpectrumGrid& g, const Path& p, const SlotRange& r)
{
	g.release(p, r);
}

/// A(p): longest run free on every link of p, clamped to the headroom left under the cap.
inline int available_contiguous_bandwidth(const SpectrumGrid& g, const Path& p, double upsilon_max)
{
	int best = 0;
	int run = 0;
	for (int s = 1; s <= g.capacity(); ++s)
	{
		bool free = true;
		for (LinkId l : p.links)
		{
			if (g.occupied(l, s))
			{
				free = false;
				break;
			}
		}
		run = free ? run + 1 : 0;
		best = std::max(best, run);
	}
	const int headroom = congestion_limit_slots(g, upsilon_max) - path_occupied_slots(g, p);
	return std::max(0, std::min(best, headroom));
}

/**
 * Pre-occupies random slot runs on every link until each link reaches
 * roughly `fill` of its capacity. Models background traffic for stress runs.
 */
inline void fill_background(SpectrumGrid& g, double fill, std::mt19937_64& rng, int max_run = 8)
{
	if (fill <= 0)
	{
		return;
	}
	const int target = int(std::floor(fill * g.capacity()));
	std::uniform_int_distribution<int> len_dist(1, std::max(1, max_run));
	std::uniform_int_distribution<int> start_dist(1, g.capacity());
	for (LinkId l = 0; l < g.link_count(); ++l)
	{
		Path single;
		single.links = {l};
		int attempts = 0;
		while (g.used_slots(l) < target && attempts < 100 * g.capacity())
		{
			++attempts;
			int len = std::min(len_dist(rng), target - g.used_slots(l));
			int start = start_dist(rng);
			if (start + len - 1 > g.capacity() || !g.range_free(single, start, start + len - 1))
			{
				continue;
			}
			g.occupy(single, SlotRange{start, len, 0});
		}
	}
}

} // namespace greenmig

#endif // GREENMIG_SPECTRUM_HPP
