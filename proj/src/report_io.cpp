#include "depthlab/experiments.hpp"

#include <json.hpp>

#include <charconv>
#include <sstream>

namespace depthlab
{

namespace
{

using nlohmann::json;

constexpr const char *csv_header = "n,d,epsilon,delta,replication,seed,deviation,bound,within_bound,achieved_depth,sigma_hat";

std::string fmt(double v)
{
	char buf[64];
	auto const res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string &field, std::size_t line, const char *column)
{
	T v{};
	auto const res = std::from_chars(field.data(), field.data() + field.size(), v);
	if (res.ec != std::errc() || res.ptr != field.data() + field.size())
		throw InputError("report CSV line " + std::to_string(line) + ": bad " + column + " '" + field + "'");
	return v;
}

json optional_json(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

json config_json(const ExperimentConfig &c)
{
	json model = {{"family", c.model.family}, {"alpha", c.model.alpha}, {"scale", c.model.scale}};
	json contaminant = {{"family", c.contaminant.family},
			    {"offset", c.contaminant.offset},
			    {"shift", c.contaminant.shift},
			    {"alpha", c.contaminant.alpha},
			    {"scale", c.contaminant.scale}};
	contaminant["location"] = c.contaminant.location ? json(*c.contaminant.location) : json(nullptr);
	return json{{"experiment", to_string(c.kind)},
		    {"seed", c.seed},
		    {"replications", c.replications},
		    {"delta", c.delta},
		    {"n", c.n_grid},
		    {"d", c.d_grid},
		    {"epsilon", c.epsilon_grid},
		    {"depth_kind", c.depth_kind.describe()},
		    {"model", model},
		    {"contaminant", contaminant},
		    {"growth", {{"gamma", optional_json(c.gamma)}, {"kappa", optional_json(c.kappa)}}},
		    {"method",
		     {{"directions", c.directions},
		      {"pool_cap", c.pool_cap},
		      {"multistarts", c.multistarts},
		      {"scatter_directions", c.scatter_directions},
		      {"coverage_assert", c.coverage_assert},
		      {"interval_check", c.interval_check}}}};
}

json record_json(const ExperimentRecord &r)
{
	return json{{"n", r.n},
		    {"d", r.d},
		    {"epsilon", r.epsilon},
		    {"delta", r.delta},
		    {"replication", r.replication},
		    {"seed", r.seed},
		    {"deviation", r.deviation},
		    {"bound", r.bound},
		    {"within_bound", r.within_bound ? json(*r.within_bound) : json(nullptr)},
		    {"achieved_depth", optional_json(r.achieved_depth)},
		    {"sigma_hat", optional_json(r.sigma_hat)}};
}

json cell_json(const CellSummary &c)
{
	return json{{"n", c.n},
		    {"d", c.d},
		    {"epsilon", c.epsilon},
		    {"replications", c.replications},
		    {"median_deviation", c.median_deviation},
		    {"q10_deviation", c.q10_deviation},
		    {"q90_deviation", c.q90_deviation},
		    {"mean_deviation", c.mean_deviation},
		    {"bound", c.bound},
		    {"coverage", optional_json(c.coverage)},
		    {"coverage_ok", c.coverage_ok},
		    {"ratio_event_frequency", c.ratio_event_frequency},
		    {"ratio_event_violations", c.ratio_event_violations},
		    {"rate_condition_holds", c.rate_condition_holds ? json(*c.rate_condition_holds) : json(nullptr)},
		    {"interval_frequency", optional_json(c.interval_frequency)}};
}

std::optional<double> opt_double(const json &j, const char *key)
{
	if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
	return j.at(key).get<double>();
}

std::optional<bool> opt_bool(const json &j, const char *key)
{
	if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
	return j.at(key).get<bool>();
}

}  // namespace

std::string summarize(const ExperimentReport &report, ReportFormat format)
{
	if (format == ReportFormat::csv) {
		std::string out = std::string(csv_header) + "\n";
		for (const auto &r : report.records) {
			out += std::to_string(r.n) + ',' + std::to_string(r.d) + ',' + fmt(r.epsilon) + ',' + fmt(r.delta) + ','
			       + std::to_string(r.replication) + ',' + std::to_string(r.seed) + ',' + fmt(r.deviation) + ','
			       + fmt(r.bound) + ',';
			if (r.within_bound) out += *r.within_bound ? "1" : "0";
			out += ',';
			if (r.achieved_depth) out += fmt(*r.achieved_depth);
			out += ',';
			if (r.sigma_hat) out += fmt(*r.sigma_hat);
			out += '\n';
		}
		return out;
	}
	json j;
	j["version"] = report.version;
	j["config"] = report.config ? config_json(*report.config) : json(nullptr);
	j["records"] = json::array();
	for (const auto &r : report.records)
		j["records"].push_back(record_json(r));
	j["cells"] = json::array();
	for (const auto &c : report.cells)
		j["cells"].push_back(cell_json(c));
	return j.dump(1) + "\n";
}

std::vector<ExperimentRecord> parse_records_csv(const std::string &text)
{
	std::istringstream in(text);
	std::string line;
	if (!std::getline(in, line) || line != csv_header) throw InputError("report CSV: unexpected header");
	std::vector<ExperimentRecord> out;
	std::size_t lineno = 1;
	while (std::getline(in, line)) {
		++lineno;
		if (line.empty()) continue;
		std::vector<std::string> f;
		std::size_t start = 0;
		for (;;) {
			std::size_t const comma = line.find(',', start);
			f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
			if (comma == std::string::npos) break;
			start = comma + 1;
		}
		if (f.size() != 11) throw InputError("report CSV line " + std::to_string(lineno) + ": expected 11 fields");
		ExperimentRecord r;
		r.n = parse_number<Eigen::Index>(f[0], lineno, "n");
		r.d = parse_number<Eigen::Index>(f[1], lineno, "d");
		r.epsilon = parse_number<double>(f[2], lineno, "epsilon");
		r.delta = parse_number<double>(f[3], lineno, "delta");
		r.replication = parse_number<Eigen::Index>(f[4], lineno, "replication");
		r.seed = parse_number<std::uint64_t>(f[5], lineno, "seed");
		r.deviation = parse_number<double>(f[6], lineno, "deviation");
		r.bound = parse_number<double>(f[7], lineno, "bound");
		if (!f[8].empty()) r.within_bound = parse_number<int>(f[8], lineno, "within_bound") != 0;
		if (!f[9].empty()) r.achieved_depth = parse_number<double>(f[9], lineno, "achieved_depth");
		if (!f[10].empty()) r.sigma_hat = parse_number<double>(f[10], lineno, "sigma_hat");
		out.push_back(r);
	}
	return out;
}

ExperimentReport parse_report_json(const std::string &text)
{
	json j;
	try {
		j = json::parse(text);
	} catch (const json::exception &e) {
		throw InputError(std::string("report JSON: ") + e.what());
	}
	ExperimentReport report;
	try {
		report.version = j.at("version").get<std::string>();
		for (const auto &jr : j.at("records")) {
			ExperimentRecord r;
			r.n = jr.at("n").get<Eigen::Index>();
			r.d = jr.at("d").get<Eigen::Index>();
			r.epsilon = jr.at("epsilon").get<double>();
			r.delta = jr.at("delta").get<double>();
			r.replication = jr.at("replication").get<Eigen::Index>();
			r.seed = jr.at("seed").get<std::uint64_t>();
			r.deviation = jr.at("deviation").get<double>();
			r.bound = jr.at("bound").get<double>();
			r.within_bound = opt_bool(jr, "within_bound");
			r.achieved_depth = opt_double(jr, "achieved_depth");
			r.sigma_hat = opt_double(jr, "sigma_hat");
			report.records.push_back(r);
		}
		if (j.contains("cells"))
			for (const auto &jc : j.at("cells")) {
				CellSummary c;
				c.n = jc.at("n").get<Eigen::Index>();
				c.d = jc.at("d").get<Eigen::Index>();
				c.epsilon = jc.at("epsilon").get<double>();
				c.replications = jc.at("replications").get<Eigen::Index>();
				c.median_deviation = jc.at("median_deviation").get<double>();
				c.q10_deviation = jc.at("q10_deviation").get<double>();
				c.q90_deviation = jc.at("q90_deviation").get<double>();
				c.mean_deviation = jc.at("mean_deviation").get<double>();
				c.bound = jc.at("bound").get<double>();
				c.coverage = opt_double(jc, "coverage");
				c.coverage_ok = jc.at("coverage_ok").get<bool>();
				c.ratio_event_frequency = jc.at("ratio_event_frequency").get<double>();
				c.ratio_event_violations = jc.at("ratio_event_violations").get<Eigen::Index>();
				c.rate_condition_holds = opt_bool(jc, "rate_condition_holds");
				c.interval_frequency = opt_double(jc, "interval_frequency");
				report.cells.push_back(c);
			}
	} catch (const json::exception &e) {
		throw InputError(std::string("report JSON: ") + e.what());
	}
	return report;
}

}  // namespace depthlab
