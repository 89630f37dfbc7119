#include "depthlab/cli.hpp"

#include "depthlab/experiments.hpp"
#include "depthlab/location_depth.hpp"
#include "depthlab/models.hpp"
#include "depthlab/scatter_depth.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace depthlab
{

namespace
{

std::string trim(const std::string &s)
{
	std::size_t const a = s.find_first_not_of(" \t\r");
	if (a == std::string::npos) return "";
	std::size_t const b = s.find_last_not_of(" \t\r");
	return s.substr(a, b - a + 1);
}

double parse_double(const std::string &field, const std::string &what)
{
	std::string const t = trim(field);
	double v = 0;
	auto const res = std::from_chars(t.data(), t.data() + t.size(), v);
	if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
		throw InputError(what + ": '" + field + "' is not a finite number");
	return v;
}

std::vector<std::string> split(const std::string &s, char sep)
{
	std::vector<std::string> out;
	std::size_t start = 0;
	for (;;) {
		std::size_t const pos = s.find(sep, start);
		out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
		if (pos == std::string::npos) return out;
		start = pos + 1;
	}
}

Vector parse_point(const std::string &text)
{
	auto const parts = split(text, ',');
	Vector x(static_cast<Eigen::Index>(parts.size()));
	for (std::size_t i = 0; i < parts.size(); ++i)
		x(static_cast<Eigen::Index>(i)) = parse_double(parts[i], "--point coordinate " + std::to_string(i + 1));
	return x;
}

bool ends_with(const std::string &s, const std::string &suffix)
{
	return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

AlphaModel resolve_model(const std::string &arg)
{
	if (ends_with(arg, ".toml")) return load_model_file(arg).model;
	return parse_model_spec(arg);
}

std::string fmt(const char *spec, double v)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, spec, v);
	return buf;
}

std::string g12(double v) { return fmt("%.12g", v); }

DepthMethod default_method(const SampleMatrix &s)
{
	if (s.dim() == 1) return DepthMethod::exact1d;
	if (s.dim() == 2 && s.size() <= 500) return DepthMethod::exact2d;
	return DepthMethod::approx;
}

void print_matrix(std::ostream &out, const Matrix &m)
{
	for (Eigen::Index i = 0; i < m.rows(); ++i) {
		for (Eigen::Index j = 0; j < m.cols(); ++j)
			out << (j ? "," : "") << g12(m(i, j));
		out << '\n';
	}
}

}  // namespace

SampleMatrix parse_data_csv(const std::string &text)
{
	std::istringstream in(text);
	std::string line;
	std::vector<std::vector<double>> rows;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (trim(line).empty()) continue;
		auto const fields = split(line, ',');
		std::vector<double> row;
		for (std::size_t j = 0; j < fields.size(); ++j)
			row.push_back(parse_double(fields[j], "data row " + std::to_string(lineno) + " column " + std::to_string(j + 1)));
		if (!rows.empty() && row.size() != rows.front().size())
			throw InputError("data row " + std::to_string(lineno) + " has " + std::to_string(row.size())
					 + " columns, expected " + std::to_string(rows.front().size()));
		rows.push_back(std::move(row));
	}
	if (rows.empty()) throw InputError("data: no observations");
	Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
	for (std::size_t i = 0; i < rows.size(); ++i)
		for (std::size_t j = 0; j < rows[i].size(); ++j)
			m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
	return SampleMatrix(std::move(m));
}

SampleMatrix load_data_csv(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) throw InputError("cannot open data file '" + path + "'");
	std::ostringstream os;
	os << in.rdbuf();
	return parse_data_csv(os.str());
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
	CLI::App app{"Halfspace depth, Tukey and scatter medians, and contamination experiments", "depthlab"};
	app.require_subcommand(1);
	app.set_version_flag("--version", depthlab_version);

	std::string model_arg, data_arg, point_arg, method_arg = "auto", kind_arg = "location", mode_arg, depth_arg = "standard";
	std::string variant_arg, config_arg, out_arg;
	Eigen::Index dirs = 256, multistarts = 8, pool_cap = 50000;
	std::uint64_t seed = 0;
	double gamma = 0, kappa = 0, epsilon = 0;
	std::optional<double> sigma_opt;

	auto *depth = app.add_subcommand("depth", "Population depth (--model) or sample depth (--data) at --point");
	auto *depth_src = depth->add_option_group("source");
	depth_src->add_option("--model", model_arg, "Model mini-spec (gaussian:d=3, cauchy:d=2, stable:alpha=0.7,d=3) or .toml file");
	depth_src->add_option("--data", data_arg, "Headerless CSV, one observation per row");
	depth_src->require_option(1);
	depth->add_option("--point", point_arg, "Comma-separated coordinates")->required();
	depth->add_option("--method", method_arg, "auto | exact1d | exact2d | approx");
	depth->add_option("--dirs", dirs, "Direction count for approx");
	depth->add_option("--seed", seed, "Direction seed");

	auto *median = app.add_subcommand("median", "Location or scatter median of a data set");
	median->add_option("--data", data_arg, "Headerless CSV, one observation per row")->required();
	median->add_option("--kind", kind_arg, "location | scatter:standard | scatter:alpha=<a>");
	median->add_option("--mode", mode_arg, "isotropic | diagonal | full (scatter only)");
	median->add_option("--method", method_arg, "Location depth method: auto | exact1d | exact2d | approx");
	median->add_option("--dirs", dirs, "Direction count");
	median->add_option("--multistarts", multistarts, "Pattern-search starts");
	median->add_option("--pool-cap", pool_cap, "Maximum number of pairwise midpoints");
	median->add_option("--seed", seed, "Seed");

	auto *solve = app.add_subcommand("solve-sigma", "Scale sigma of the population scatter median sigma^2 I");
	solve->add_option("--model", model_arg, "Model mini-spec or .toml file")->required();
	solve->add_option("--depth", depth_arg, "standard | alpha");

	auto *certify = app.add_subcommand("certify", "Check a growth condition A2, A3 or A4 on the model marginal");
	certify->add_option("--model", model_arg, "Model mini-spec or .toml file")->required();
	certify->add_option("--variant", variant_arg, "A2 | A3 | A4")->required();
	certify->add_option("--gamma", gamma, "Window half-width")->required();
	certify->add_option("--kappa", kappa, "Required slope")->required();
	certify->add_option("--epsilon", epsilon, "Contamination level");
	certify->add_option("--sigma", sigma_opt, "Window centre scale (A3, A4)");

	auto *experiment = app.add_subcommand("experiment", "Run a Monte-Carlo experiment from a TOML config");
	experiment->add_option("--config", config_arg, "Experiment TOML file")->required();
	experiment->add_option("--out", out_arg, "Output directory for report.csv and report.json")->required();

	try {
		std::vector<std::string> reversed(args.rbegin(), args.rend());
		app.parse(reversed);
	} catch (const CLI::CallForHelp &) {
		out << app.help();
		return 0;
	} catch (const CLI::CallForVersion &) {
		out << depthlab_version << '\n';
		return 0;
	} catch (const CLI::ParseError &e) {
		err << "error: " << e.what() << '\n';
		return 1;
	}

	try {
		if (depth->parsed()) {
			Vector const x = parse_point(point_arg);
			if (!model_arg.empty()) {
				out << g12(population_hd(x, resolve_model(model_arg))) << '\n';
				return 0;
			}
			SampleMatrix const s = load_data_csv(data_arg);
			DepthOptions o;
			o.method = method_arg == "auto" ? default_method(s) : parse_depth_method(method_arg);
			o.directions = dirs;
			o.seed = seed;
			out << g12(sample_hd(x, s, o)) << '\n';
			return 0;
		}
		if (median->parsed()) {
			SampleMatrix const s = load_data_csv(data_arg);
			MedianOptions mo;
			mo.method = method_arg == "auto" ? default_method(s) : parse_depth_method(method_arg);
			mo.directions = dirs;
			mo.multistarts = multistarts;
			mo.midpoint_cap = pool_cap;
			mo.seed = seed;
			if (kind_arg == "location") {
				if (!mode_arg.empty()) throw InputError("--mode applies to scatter medians only");
				MedianResult const r = tukey_median(s, mo);
				out << "point:";
				for (Eigen::Index j = 0; j < r.point.size(); ++j)
					out << (j ? "," : " ") << g12(r.point(j));
				out << "\ndepth: " << g12(r.achieved_depth) << '\n';
				if (r.left_deepest_region) out << "note: barycenter depth is below the best candidate depth " << g12(r.pool_max_depth) << '\n';
				return 0;
			}
			if (kind_arg.rfind("scatter:", 0) != 0) throw InputError("--kind must be location, scatter:standard or scatter:alpha=<a>");
			if (mode_arg.empty()) throw InputError("scatter medians need --mode isotropic|diagonal|full");
			ScatterMedianOptions so;
			so.depth = parse_scatter_depth(kind_arg.substr(8));
			so.mode = parse_scatter_mode(mode_arg);
			so.directions = dirs;
			so.multistarts = std::max<Eigen::Index>(multistarts, 1);
			so.seed = seed;
			so.center = mo;
			ScatterMedianResult const r = sample_scatter_median(s, so);
			out << "center:";
			for (Eigen::Index j = 0; j < r.center.size(); ++j)
				out << (j ? "," : " ") << g12(r.center(j));
			out << '\n';
			if (r.sigma) out << "sigma: " << g12(*r.sigma) << '\n';
			out << "matrix:\n";
			print_matrix(out, r.matrix.matrix());
			out << "depth: " << g12(r.achieved_depth) << '\n';
			return 0;
		}
		if (solve->parsed()) {
			AlphaModel const m = resolve_model(model_arg);
			double s = 0;
			if (depth_arg == "standard")
				s = population_scatter_sigma(m);
			else if (depth_arg == "alpha")
				s = population_alpha_scatter_sigma(m);
			else
				throw InputError("--depth must be standard or alpha");
			out << fmt("%.12f", s) << '\n';
			return 0;
		}
		if (certify->parsed()) {
			AlphaModel const m = resolve_model(model_arg);
			GrowthVariant const v = parse_growth_variant(variant_arg);
			if (v != GrowthVariant::A2 && !sigma_opt) throw InputError(variant_arg + " needs --sigma");
			GrowthCertificate const c = check_growth_condition(m.marginal, v, gamma, kappa, sigma_opt, epsilon);
			out << "variant: " << to_string(c.variant) << '\n'
			    << "holds: " << (c.holds ? "true" : "false") << '\n'
			    << "witnessed_inf: " << g12(c.witnessed_inf) << '\n'
			    << "range_ok: " << (c.range_ok ? "true" : "false") << '\n';
			if (!c.reason.empty()) out << "reason: " << c.reason << '\n';
			return 0;
		}
		if (experiment->parsed()) {
			ExperimentConfig const cfg = load_experiment_config(config_arg);
			ExperimentReport const rep = run_experiment(cfg);
			std::filesystem::create_directories(out_arg);
			auto write = [&](const std::string &name, const std::string &body) {
				std::ofstream f(std::filesystem::path(out_arg) / name, std::ios::binary);
				if (!f) throw InputError("cannot write to '" + out_arg + "'");
				f << body;
			};
			write("report.csv", summarize(rep, ReportFormat::csv));
			write("report.json", summarize(rep, ReportFormat::json));
			out << coverage_table(rep);
			bool const ok = !cfg.coverage_assert || rep.all_coverage_ok();
			if (!ok) err << "coverage assertion failed\n";
			return ok ? 0 : 1;
		}
	} catch (const InputError &e) {
		err << "error: " << e.what() << '\n';
		return 1;
	} catch (const DomainError &e) {
		err << "error: " << e.what() << '\n';
		return 1;
	} catch (const NumericalError &e) {
		err << "numerical error: " << e.what() << '\n';
		return 2;
	} catch (const std::exception &e) {
		err << "numerical error: " << e.what() << '\n';
		return 2;
	}
	return 1;
}

}  // namespace depthlab
