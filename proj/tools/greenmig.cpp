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


// Command-line front end: run sweeps, emit plot series, validate runs, export the integer program.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <greenmig.hpp>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_spec = 2;

int cmd_run(const std::string& spec_path, std::optional<std::uint64_t> seed, const std::string& out)
{
	auto spec = greenmig::read_spec_file(spec_path);
	if (seed)
	{
		spec.seed = *seed;
	}
	const auto result = greenmig::run_experiment(spec, out);
	std::size_t unsolved = 0;
	for (const auto& r : result.rows)
	{
		unsolved += r.status != "ok";
	}
	std::cout << "wrote " << result.rows.size() << " rows to " << out << "\n";
	if (unsolved)
	{
		std::cout << unsolved << " oracle instances exceeded the node limit (status not_solved)\n";
	}
	return exit_ok;
}

int cmd_plot(const std::string& figure, const std::string& in, std::optional<double> umax, std::optional<double> load, const std::string& out)
{
	const std::string csv = greenmig::emit_plot_data(in, figure, umax, load);
	if (out.empty())
	{
		std::cout << csv;
	}
	else
	{
		std::ofstream f(out, std::ios::binary);
		f << csv;
		if (!f.flush())
		{
			throw std::runtime_error("cannot write " + out);
		}
	}
	return exit_ok;
}

int cmd_validate(const std::string& in)
{
	const auto report = greenmig::validate_run(in);
	std::cout << report.text();
	return report.passed() ? exit_ok : exit_validation;
}

int cmd_export(const std::string& spec_path, const std::string& out)
{
	const auto spec = greenmig::read_spec_file(spec_path);
	const auto net = greenmig::build_network(spec);
	const auto sc = greenmig::cell_scenario(spec, net, spec.loads.front(), spec.umax.front(), 0);
	const auto model = greenmig::build_ilp(sc);
	greenmig::write_lp_file(model, out);
	std::cout << "wrote " << model.variables().size() << " variables, " << model.rows().size() << " rows to " << out << "\n";
	return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Renewable-aware VM migration over elastic optical networks"};
	app.require_subcommand(1);

	std::string spec_path, out_dir = "run", in_dir, figure, out_file;
	std::optional<std::uint64_t> seed;
	std::optional<double> umax, load;

	auto* run = app.add_subcommand("run", "run an experiment sweep");
	run->add_option("--spec", spec_path, "experiment specification (JSON)")->required();
	run->add_option("--seed", seed, "override the base seed");
	run->add_option("--out", out_dir, "output directory")->capture_default_str();

	auto* plot = app.add_subcommand("plot", "emit plot series from a run directory");
	plot->add_option("--figure", figure, "brown-cost-vs-load | migrations-vs-load | cost-vs-umax")->required();
	plot->add_option("--in", in_dir, "run directory")->required();
	plot->add_option("--umax", umax, "fixed umax for load figures");
	plot->add_option("--load", load, "fixed load for the umax figure");
	plot->add_option("--out", out_file, "write to a file instead of stdout");

	auto* validate = app.add_subcommand("validate", "re-check every invariant of a recorded run");
	validate->add_option("--in", in_dir, "run directory")->required();

	auto* exp = app.add_subcommand("export-ilp", "write the integer program of the first sweep cell in LP format");
	exp->add_option("--spec", spec_path, "experiment specification (JSON)")->required();
	exp->add_option("--out", out_file, "LP file")->required();

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError& e)
	{
		return app.exit(e) == 0 ? exit_ok : exit_spec;
	}

	try
	{
		if (*run)
		{
			return cmd_run(spec_path, seed, out_dir);
		}
		if (*plot)
		{
			return cmd_plot(figure, in_dir, umax, load, out_file);
		}
		if (*validate)
		{
			return cmd_validate(in_dir);
		}
		return cmd_export(spec_path, out_file);
	}
	catch (const greenmig::spec_error& e)
	{
		std::cerr << "spec error: " << e.what() << "\n";
		return exit_spec;
	}
	catch (const greenmig::model_too_large& e)
	{
		std::cerr << "model too large: " << e.what() << "\n";
		return exit_spec;
	}
	catch (const std::exception& e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return exit_validation;
	}
}
